//! Synthetic workload generators.

use std::fmt::Write;

use crate::ir::{ElementType, TensorType};

use super::AppError;

/// Collective appended after the generated GEMM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GemmCollective {
    None,
    AllReduce,
    AllGather,
    ReduceScatter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemmSpec {
    pub m: u64,
    pub n: u64,
    pub k: u64,
    pub dtype: ElementType,
    pub collective: GemmCollective,
    /// Participants, used to size gathered and scattered results.
    pub group: u64,
}

impl Default for GemmSpec {
    fn default() -> Self {
        Self {
            m: 4096,
            n: 4096,
            k: 4096,
            dtype: ElementType::BF16,
            collective: GemmCollective::AllReduce,
            group: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlocksSpec {
    pub layers: usize,
    pub batch: u64,
    pub hidden: u64,
    pub dtype: ElementType,
}

impl Default for BlocksSpec {
    fn default() -> Self {
        Self {
            layers: 4,
            batch: 128,
            hidden: 1024,
            dtype: ElementType::BF16,
        }
    }
}

fn reducer(out: &mut String, dtype: ElementType) {
    let s = TensorType::scalar(dtype);
    let _ = write!(
        out,
        "({{\n  ^bb0(%acc: {s}, %elem: {s}):\n    %sum = stablehlo.add %acc, %elem : {s}\n    stablehlo.return %sum : {s}\n  }})"
    );
}

/// `dot_general` of an M×K by K×N matrix, optionally followed by a collective.
pub fn gemm_module(spec: &GemmSpec) -> Result<String, AppError> {
    let t = |r: u64, c: u64| TensorType::new([r, c], spec.dtype);
    let (a, b, c) = (t(spec.m, spec.k), t(spec.k, spec.n), t(spec.m, spec.n));
    let mut out = String::new();
    let _ = writeln!(out, "// {}x{}x{} GEMM", spec.m, spec.n, spec.k);
    let (ret, ret_ty) = match spec.collective {
        GemmCollective::None => ("%0", c.clone()),
        GemmCollective::AllReduce => ("%1", c.clone()),
        GemmCollective::AllGather => ("%1", t(spec.m * spec.group, spec.n)),
        GemmCollective::ReduceScatter => {
            if spec.group == 0 || !spec.m.is_multiple_of(spec.group) {
                return Err(AppError::new(
                    super::Stage::Generate,
                    format!("m = {} is not divisible by group {}", spec.m, spec.group),
                ));
            }
            ("%1", t(spec.m / spec.group, spec.n))
        }
    };
    let _ = writeln!(out, "func.func @main(%lhs: {a}, %rhs: {b}) -> {ret_ty} {{");
    let _ = writeln!(
        out,
        "  %0 = stablehlo.dot_general %lhs, %rhs, contracting_dims = [1] x [0] : ({a}, {b}) -> {c}"
    );
    match spec.collective {
        GemmCollective::None => {}
        GemmCollective::AllReduce => {
            out.push_str("  %1 = \"stablehlo.all_reduce\"(%0) ");
            reducer(&mut out, spec.dtype);
            let _ = writeln!(out, " : ({c}) -> {c}");
        }
        GemmCollective::AllGather => {
            let _ = writeln!(
                out,
                "  %1 = \"stablehlo.all_gather\"(%0) {{all_gather_dim = 0 : i64}} : ({c}) -> {ret_ty}"
            );
        }
        GemmCollective::ReduceScatter => {
            out.push_str("  %1 = \"stablehlo.reduce_scatter\"(%0) ");
            reducer(&mut out, spec.dtype);
            let _ = writeln!(out, " {{scatter_dimension = 0 : i64}} : ({c}) -> {ret_ty}");
        }
    }
    let _ = writeln!(out, "  func.return {ret} : {ret_ty}\n}}");
    Ok(out)
}

/// `layers` identical blocks of matmul → bias add → tanh → all_reduce.
pub fn blocks_module(spec: &BlocksSpec) -> Result<String, AppError> {
    if spec.layers == 0 {
        return Err(AppError::new(super::Stage::Generate, "layers must be at least 1"));
    }
    let act = TensorType::new([spec.batch, spec.hidden], spec.dtype);
    let w = TensorType::new([spec.hidden, spec.hidden], spec.dtype);
    let mut out = String::new();
    let _ = writeln!(out, "// {} stacked blocks, batch {} hidden {}", spec.layers, spec.batch, spec.hidden);
    let mut args = vec![format!("%x: {act}")];
    for l in 0..spec.layers {
        args.push(format!("%w{l}: {w}"));
        args.push(format!("%b{l}: {act}"));
    }
    let _ = writeln!(out, "func.func @main({}) -> {act} {{", args.join(", "));
    let mut prev = "%x".to_string();
    for l in 0..spec.layers {
        let base = 4 * l;
        let _ = writeln!(
            out,
            "  %{base} = stablehlo.dot_general {prev}, %w{l}, contracting_dims = [1] x [0] : ({act}, {w}) -> {act}"
        );
        let _ = writeln!(out, "  %{} = stablehlo.add %{base}, %b{l} : {act}", base + 1);
        let _ = writeln!(out, "  %{} = stablehlo.tanh %{} : {act}", base + 2, base + 1);
        let _ = write!(out, "  %{} = \"stablehlo.all_reduce\"(%{}) ", base + 3, base + 2);
        reducer(&mut out, spec.dtype);
        let _ = writeln!(out, " : ({act}) -> {act}");
        prev = format!("%{}", base + 3);
    }
    let _ = writeln!(out, "  func.return {prev} : {act}\n}}");
    Ok(out)
}
