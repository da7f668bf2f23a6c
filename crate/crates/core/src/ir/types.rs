//! In-memory model of a parsed StableHLO module.

use std::fmt;

use super::IrError;

/// Element type of a ranked tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementType {
    F64,
    F32,
    F16,
    BF16,
    I64,
    I32,
    I16,
    I8,
    /// Predicates occupy one byte each.
    I1,
}

impl ElementType {
    pub const ALL: [ElementType; 9] = [
        ElementType::F64,
        ElementType::F32,
        ElementType::F16,
        ElementType::BF16,
        ElementType::I64,
        ElementType::I32,
        ElementType::I16,
        ElementType::I8,
        ElementType::I1,
    ];

    pub fn byte_width(self) -> u64 {
        match self {
            ElementType::F64 | ElementType::I64 => 8,
            ElementType::F32 | ElementType::I32 => 4,
            ElementType::F16 | ElementType::BF16 | ElementType::I16 => 2,
            ElementType::I8 | ElementType::I1 => 1,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ElementType::F64 => "f64",
            ElementType::F32 => "f32",
            ElementType::F16 => "f16",
            ElementType::BF16 => "bf16",
            ElementType::I64 => "i64",
            ElementType::I32 => "i32",
            ElementType::I16 => "i16",
            ElementType::I8 => "i8",
            ElementType::I1 => "i1",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.keyword() == s)
    }

    pub fn is_integer(self) -> bool {
        matches!(
            self,
            ElementType::I64 | ElementType::I32 | ElementType::I16 | ElementType::I8 | ElementType::I1
        )
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A statically shaped tensor type such as `tensor<4x6xf32>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorType {
    pub shape: Vec<u64>,
    pub element: ElementType,
}

impl TensorType {
    pub fn new(shape: impl Into<Vec<u64>>, element: ElementType) -> Self {
        Self {
            shape: shape.into(),
            element,
        }
    }

    pub fn scalar(element: ElementType) -> Self {
        Self::new(Vec::new(), element)
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Product of extents; the empty product of a scalar is 1.
    pub fn element_count(&self) -> Result<u64, IrError> {
        self.shape
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| IrError::Overflow(self.to_string()))
    }

    pub fn byte_size(&self) -> Result<u64, IrError> {
        self.element_count()?
            .checked_mul(self.element.byte_width())
            .ok_or_else(|| IrError::Overflow(self.to_string()))
    }
}

impl fmt::Display for TensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("tensor<")?;
        for d in &self.shape {
            write!(f, "{d}x")?;
        }
        write!(f, "{}>", self.element)
    }
}

/// Bytes occupied by a tensor: product of extents times element width.
pub fn tensor_bytes(t: &TensorType) -> Result<u64, IrError> {
    t.byte_size()
}

/// Attribute payloads understood by the toolchain. Anything else is kept as
/// the exact source text in [`AttrValue::Opaque`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrValue {
    Int(i64),
    IntList(Vec<i64>),
    IntLists(Vec<Vec<i64>>),
    Str(String),
    Bool(bool),
    Opaque(String),
}

impl AttrValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttrValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_int_list(&self) -> Option<&[i64]> {
        match self {
            AttrValue::IntList(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub key: String,
    pub value: AttrValue,
}

impl Attribute {
    pub fn new(key: impl Into<String>, value: AttrValue) -> Self {
        Self {
            key: key.into(),
            value,
        }
    }
}

/// A nested single-block region (reducer body or fused computation).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Region {
    pub args: Vec<(String, TensorType)>,
    pub ops: Vec<HloOperation>,
    pub return_names: Vec<String>,
    pub return_types: Vec<TensorType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HloOperation {
    /// Position of the operation within its enclosing block.
    pub id: usize,
    pub result_names: Vec<String>,
    pub op_name: String,
    pub operand_names: Vec<String>,
    pub attributes: Vec<Attribute>,
    pub operand_types: Vec<TensorType>,
    pub result_types: Vec<TensorType>,
    pub region: Option<Region>,
}

impl HloOperation {
    /// Op name without its dialect prefix (`stablehlo.add` -> `add`).
    pub fn short_name(&self) -> &str {
        short_op_name(&self.op_name)
    }

    pub fn attr(&self, key: &str) -> Option<&AttrValue> {
        self.attributes
            .iter()
            .find(|a| a.key == key)
            .map(|a| &a.value)
    }

    /// Ops nested in this operation's region, if any.
    pub fn region_ops(&self) -> &[HloOperation] {
        self.region.as_ref().map(|r| r.ops.as_slice()).unwrap_or(&[])
    }
}

pub fn short_op_name(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Argument {
    pub name: String,
    pub ty: TensorType,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub visibility: Option<String>,
    pub args: Vec<Argument>,
    pub result_types: Vec<TensorType>,
    pub body: Vec<HloOperation>,
    pub return_names: Vec<String>,
    pub return_types: Vec<TensorType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HloModule {
    pub name: Option<String>,
    pub attributes: Vec<Attribute>,
    pub functions: Vec<Function>,
}

impl HloModule {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// The entry point. The parser guarantees it exists.
    pub fn main(&self) -> &Function {
        self.function("main").expect("module has no main function")
    }
}
