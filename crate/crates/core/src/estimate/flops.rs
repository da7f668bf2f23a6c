//! Per-operation FLOP counts.
//!
//! | op                                  | FLOPs                                   |
//! |-------------------------------------|-----------------------------------------|
//! | `dot_general`, `dot`                | 2 · output elements · contracted extent |
//! | `convolution`                       | 2 · output elements · kernel window · input features per group |
//! | `reduce`, `reduce_window`           | input elements                          |
//! | elementwise, compare, select, convert | output elements                       |
//! | transpose, reshape, broadcast, ...  | output elements                         |
//! | `custom_call` and friends           | 0                                       |
//! | ops with a body (`fusion`, `call`)  | sum over the body                       |

use crate::ir::{AttrValue, HloOperation, TensorType};

use super::EstimateError;

const ELEMENTWISE: &[&str] = &[
    "abs", "add", "and", "atan2", "bitcast_convert", "cbrt", "ceil", "clamp", "compare", "complex",
    "convert", "cosine", "count_leading_zeros", "divide", "erf", "exponential",
    "exponential_minus_one", "floor", "imag", "is_finite", "log", "log_plus_one", "logistic",
    "maximum", "minimum", "multiply", "negate", "not", "or", "popcnt", "power", "real",
    "reduce_precision", "remainder", "round_nearest_afz", "round_nearest_even", "rsqrt", "select",
    "shift_left", "shift_right_arithmetic", "shift_right_logical", "sign", "sine", "sqrt",
    "subtract", "tan", "tanh", "xor",
];

const DATA_MOVEMENT: &[&str] = &[
    "broadcast", "broadcast_in_dim", "concatenate", "copy", "dynamic_broadcast_in_dim",
    "dynamic_slice", "dynamic_update_slice", "gather", "pad", "reshape", "reverse", "rng",
    "rng_bit_generator", "scatter", "select_and_scatter", "slice", "sort", "transpose",
];

const FREE: &[&str] = &[
    "after_all", "custom_call", "get_tuple_element", "optimization_barrier", "partition_id",
    "replica_id", "tuple",
];


fn overflow(op: &HloOperation) -> EstimateError {
    EstimateError::FlopOverflow(op.op_name.clone())
}

fn elements(op: &HloOperation, types: &[TensorType]) -> Result<u64, EstimateError> {
    types.iter().try_fold(0u64, |acc, t| {
        let n = t.element_count().map_err(|_| overflow(op))?;
        acc.checked_add(n).ok_or_else(|| overflow(op))
    })
}

fn product(op: &HloOperation, xs: impl IntoIterator<Item = u64>) -> Result<u64, EstimateError> {
    xs.into_iter()
        .try_fold(1u64, |acc, x| acc.checked_mul(x).ok_or_else(|| overflow(op)))
}

/// FLOPs of one operation. Ops without a rule yield
/// [`EstimateError::UnknownOp`]; the roofline estimator decides whether that
/// is fatal.
pub fn op_flops(op: &HloOperation) -> Result<u64, EstimateError> {
    let short = op.short_name();
    match short {
        "dot_general" | "dot" => dot_flops(op),
        "convolution" => conv_flops(op),
        "reduce" | "reduce_window" => {
            // operands are inputs followed by one init value per input
            let inputs = (op.operand_types.len() / 2).max(1).min(op.operand_types.len());
            elements(op, &op.operand_types[..inputs])
        }
        _ if ELEMENTWISE.contains(&short) || DATA_MOVEMENT.contains(&short) => {
            elements(op, &op.result_types)
        }
        _ if FREE.contains(&short) => Ok(0),
        _ if op.region.is_some() => op.region_ops().iter().try_fold(0u64, |acc, inner| {
            acc.checked_add(op_flops(inner)?).ok_or_else(|| overflow(op))
        }),
        _ => Err(EstimateError::UnknownOp(op.op_name.clone())),
    }
}

fn missing(op: &HloOperation, what: &str) -> EstimateError {
    EstimateError::MissingDimensionNumbers {
        op: op.op_name.clone(),
        what: what.to_string(),
    }
}

/// `key = [..]` inside an opaque attribute such as `#stablehlo.dot<...>`.
fn list_in_opaque(text: &str, key: &str) -> Option<Vec<i64>> {
    let start = text.find(key)? + key.len();
    let rest = text[start..].trim_start().strip_prefix('=')?.trim_start();
    let body = rest.strip_prefix('[')?;
    let body = &body[..body.find(']')?];
    body.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect()
}

fn dims_attr(op: &HloOperation, key: &str) -> Option<Vec<i64>> {
    if let Some(v) = op.attr(key) {
        return v.as_int_list().map(<[i64]>::to_vec);
    }
    op.attributes.iter().find_map(|a| match &a.value {
        AttrValue::Opaque(text) | AttrValue::Str(text) => list_in_opaque(text, key),
        _ => None,
    })
}

fn dot_flops(op: &HloOperation) -> Result<u64, EstimateError> {
    let lhs = op.operand_types.first().ok_or_else(|| missing(op, "operands"))?;
    let contracting: Vec<i64> = if op.short_name() == "dot" {
        // plain dot contracts the last lhs dimension
        match lhs.rank() {
            0 => vec![],
            r => vec![r as i64 - 1],
        }
    } else {
        dims_attr(op, "lhs_contracting_dimensions")
            .ok_or_else(|| missing(op, "lhs_contracting_dimensions"))?
    };
    let extents = contracting
        .iter()
        .map(|&d| {
            usize::try_from(d)
                .ok()
                .and_then(|d| lhs.shape.get(d).copied())
                .ok_or_else(|| missing(op, &format!("contracting dimension {d} out of range")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k = product(op, extents)?;
    let out = elements(op, &op.result_types)?;
    product(op, [2, out, k])
}

/// Position of the kernel output-feature dimension.
fn kernel_output_dim(op: &HloOperation) -> Option<usize> {
    if let Some(d) = op.attr("kernel_output_feature_dimension").and_then(AttrValue::as_int) {
        return usize::try_from(d).ok();
    }
    op.attributes.iter().find_map(|a| match &a.value {
        AttrValue::Opaque(text) | AttrValue::Str(text) => {
            let (_, rest) = text.split_once("]x[")?;
            let kernel = &rest[..rest.find(']')?];
            kernel.split(',').map(str::trim).position(|s| s == "o")
        }
        _ => None,
    })
}

fn conv_flops(op: &HloOperation) -> Result<u64, EstimateError> {
    let kernel = op.operand_types.get(1).ok_or_else(|| missing(op, "kernel operand"))?;
    let o = kernel_output_dim(op).ok_or_else(|| missing(op, "kernel output feature dimension"))?;
    if o >= kernel.rank() {
        return Err(missing(op, "kernel output feature dimension out of range"));
    }
    // kernel window times input features per group
    let per_output = product(
        op,
        kernel.shape.iter().enumerate().filter(|&(i, _)| i != o).map(|(_, &d)| d),
    )?;
    let out = elements(op, &op.result_types)?;
    product(op, [2, out, per_output])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_module;

    fn body(args: &str, ops: &str) -> Vec<HloOperation> {
        parse_module(&format!("func.func @main({args}) {{\n{ops}\nfunc.return\n}}"))
            .unwrap()
            .main()
            .body
            .clone()
    }

    #[test]
    fn fragment_counts() {
        let m = parse_module(include_str!("../../fixtures/matmul_allreduce.mlir")).unwrap();
        let b = &m.main().body;
        assert_eq!(op_flops(&b[0]).unwrap(), 144);
        assert_eq!(op_flops(&b[1]).unwrap(), 18);
    }

    #[test]
    fn elementwise_counts_outputs() {
        let ops = body("%x: tensor<3x6xf32>", "%0 = stablehlo.add %x, %x : tensor<3x6xf32>\n%1 = stablehlo.convert %0 : (tensor<3x6xf32>) -> tensor<3x6xbf16>");
        assert_eq!(op_flops(&ops[0]).unwrap(), 18);
        assert_eq!(op_flops(&ops[1]).unwrap(), 18);
    }

    #[test]
    fn empty_contraction() {
        let ops = body(
            "%a: tensor<4x0xf32>, %b: tensor<0x5xf32>",
            "%0 = stablehlo.dot_general %a, %b, contracting_dims = [1] x [0] : (tensor<4x0xf32>, tensor<0x5xf32>) -> tensor<4x5xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 0);
    }

    #[test]
    fn batched_and_opaque_dims() {
        let ops = body(
            "%a: tensor<2x3x4xf32>, %b: tensor<2x4x5xf32>",
            "%0 = \"stablehlo.dot_general\"(%a, %b) {dot_dimension_numbers = #stablehlo.dot<lhs_batching_dimensions = [0], rhs_batching_dimensions = [0], lhs_contracting_dimensions = [2], rhs_contracting_dimensions = [1]>} : (tensor<2x3x4xf32>, tensor<2x4x5xf32>) -> tensor<2x3x5xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 2 * 2 * 3 * 5 * 4);
    }

    #[test]
    fn plain_dot() {
        let ops = body(
            "%a: tensor<3x4xf32>, %b: tensor<4x5xf32>",
            "%0 = \"stablehlo.dot\"(%a, %b) : (tensor<3x4xf32>, tensor<4x5xf32>) -> tensor<3x5xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 2 * 3 * 5 * 4);
    }

    #[test]
    fn dot_without_dims_is_an_error() {
        let ops = body(
            "%a: tensor<3x4xf32>, %b: tensor<4x5xf32>",
            "%0 = \"stablehlo.dot_general\"(%a, %b) : (tensor<3x4xf32>, tensor<4x5xf32>) -> tensor<3x5xf32>",
        );
        assert!(matches!(op_flops(&ops[0]), Err(EstimateError::MissingDimensionNumbers { .. })));
    }

    #[test]
    fn convolution() {
        // NHWC input 1x8x8x16, HWIO kernel 3x3x16x32, output 1x6x6x32
        let ops = body(
            "%x: tensor<1x8x8x16xf32>, %k: tensor<3x3x16x32xf32>",
            "%0 = \"stablehlo.convolution\"(%x, %k) {dimension_numbers = #stablehlo.conv<[b, 0, 1, f]x[0, 1, i, o]->[b, 0, 1, f]>, feature_group_count = 1 : i64, batch_group_count = 1 : i64} : (tensor<1x8x8x16xf32>, tensor<3x3x16x32xf32>) -> tensor<1x6x6x32xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 2 * 36 * 32 * 9 * 16);
        // depthwise: 16 groups, kernel carries one input feature per group
        let ops = body(
            "%x: tensor<1x8x8x16xf32>, %k: tensor<3x3x1x16xf32>",
            "%0 = \"stablehlo.convolution\"(%x, %k) {dimension_numbers = #stablehlo.conv<[b, 0, 1, f]x[0, 1, i, o]->[b, 0, 1, f]>, feature_group_count = 16 : i64} : (tensor<1x8x8x16xf32>, tensor<3x3x1x16xf32>) -> tensor<1x6x6x16xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 2 * 36 * 16 * 9);
    }

    #[test]
    fn reduce_counts_inputs() {
        let ops = body(
            "%x: tensor<4x8xf32>, %z: tensor<f32>",
            "%0 = \"stablehlo.reduce\"(%x, %z) ({\n^bb0(%a: tensor<f32>, %b: tensor<f32>):\n%s = stablehlo.add %a, %b : tensor<f32>\nstablehlo.return %s : tensor<f32>\n}) {dimensions = array<i64: 1>} : (tensor<4x8xf32>, tensor<f32>) -> tensor<4xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 32);
    }

    #[test]
    fn fusion_sums_body() {
        let ops = body(
            "%x: tensor<8xf32>",
            "%0 = \"xla.fusion\"(%x) ({\n^bb0(%a: tensor<8xf32>):\n%1 = stablehlo.tanh %a : tensor<8xf32>\n%2 = stablehlo.multiply %1, %1 : tensor<8xf32>\nstablehlo.return %2 : tensor<8xf32>\n}) : (tensor<8xf32>) -> tensor<8xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 16);
    }

    #[test]
    fn free_and_unknown() {
        let ops = body(
            "%x: tensor<8xf32>",
            "%0 = stablehlo.custom_call @cublas(%x) : (tensor<8xf32>) -> tensor<8xf32>\n%1 = \"mystery.op\"(%x) : (tensor<8xf32>) -> tensor<8xf32>",
        );
        assert_eq!(op_flops(&ops[0]).unwrap(), 0);
        assert_eq!(op_flops(&ops[1]), Err(EstimateError::UnknownOp("mystery.op".into())));
    }
}
