use std::fmt::Write;

use super::types::*;

/// Print a module in the generic form accepted by [`super::parse_module`].
pub fn print_module(m: &HloModule) -> String {
    let mut out = String::new();
    let wrapped = m.name.is_some() || !m.attributes.is_empty();
    let indent = if wrapped {
        out.push_str("module");
        if let Some(name) = &m.name {
            let _ = write!(out, " @{name}");
        }
        if !m.attributes.is_empty() {
            let _ = write!(out, " attributes {}", attr_dict(&m.attributes));
        }
        out.push_str(" {\n");
        1
    } else {
        0
    };
    for (i, f) in m.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(&mut out, f, indent);
    }
    if wrapped {
        out.push_str("}\n");
    }
    out
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_function(out: &mut String, f: &Function, depth: usize) {
    pad(out, depth);
    out.push_str("func.func ");
    if let Some(v) = &f.visibility {
        let _ = write!(out, "{v} ");
    }
    let _ = write!(out, "@{}(", f.name);
    for (i, a) in f.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", a.name, a.ty);
        if !a.attributes.is_empty() {
            let _ = write!(out, " {}", attr_dict(&a.attributes));
        }
    }
    out.push(')');
    if !f.result_types.is_empty() {
        let _ = write!(out, " -> ({})", join(&f.result_types));
    }
    out.push_str(" {\n");
    for op in &f.body {
        print_op(out, op, depth + 1);
    }
    pad(out, depth + 1);
    out.push_str("func.return");
    print_return_values(out, &f.return_names, &f.return_types);
    out.push('\n');
    pad(out, depth);
    out.push_str("}\n");
}

fn print_return_values(out: &mut String, names: &[String], types: &[TensorType]) {
    if !names.is_empty() {
        let _ = write!(out, " {}", names.join(", "));
    }
    if !types.is_empty() {
        let _ = write!(out, " : {}", join(types));
    }
}

fn print_op(out: &mut String, op: &HloOperation, depth: usize) {
    pad(out, depth);
    if !op.result_names.is_empty() {
        let _ = write!(out, "{} = ", result_list(&op.result_names));
    }
    let _ = write!(out, "\"{}\"({})", op.op_name, op.operand_names.join(", "));
    if let Some(region) = &op.region {
        out.push_str(" ({\n");
        if !region.args.is_empty() {
            pad(out, depth);
            out.push_str("^bb0(");
            for (i, (name, ty)) in region.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{name}: {ty}");
            }
            out.push_str("):\n");
        }
        for inner in &region.ops {
            print_op(out, inner, depth + 1);
        }
        pad(out, depth + 1);
        out.push_str("stablehlo.return");
        print_return_values(out, &region.return_names, &region.return_types);
        out.push('\n');
        pad(out, depth);
        out.push_str("})");
    }
    if !op.attributes.is_empty() {
        let _ = write!(out, " {}", attr_dict(&op.attributes));
    }
    let results = if op.result_types.len() == 1 {
        op.result_types[0].to_string()
    } else {
        format!("({})", join(&op.result_types))
    };
    let _ = writeln!(out, " : ({}) -> {}", join(&op.operand_types), results);
}

/// `%0#0, %0#1` collapses back to `%0:2`.
fn result_list(names: &[String]) -> String {
    if names.len() > 1 {
        if let Some((base, _)) = names[0].split_once('#') {
            let packed = names
                .iter()
                .enumerate()
                .all(|(i, n)| *n == format!("{base}#{i}"));
            if packed {
                return format!("{base}:{}", names.len());
            }
        }
    }
    names.join(", ")
}

fn join(types: &[TensorType]) -> String {
    types
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn attr_dict(attrs: &[Attribute]) -> String {
    let body = attrs
        .iter()
        .map(|a| format!("{} = {}", attr_key(&a.key), format_attr_value(&a.value)))
        .collect::<Vec<_>>()
        .join(", ");
    format!("{{{body}}}")
}

fn attr_key(key: &str) -> String {
    let bare = key
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$' | '-'));
    if bare {
        key.to_string()
    } else {
        quote(key)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\{:02X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn int_list(v: &[i64]) -> String {
    let items = v.iter().map(ToString::to_string).collect::<Vec<_>>();
    format!("[{}]", items.join(", "))
}

/// Attribute value in source syntax.
pub fn format_attr_value(v: &AttrValue) -> String {
    match v {
        AttrValue::Int(i) => i.to_string(),
        AttrValue::IntList(l) => int_list(l),
        AttrValue::IntLists(ls) => {
            let items = ls.iter().map(|l| int_list(l)).collect::<Vec<_>>();
            format!("[{}]", items.join(", "))
        }
        AttrValue::Str(s) => quote(s),
        AttrValue::Bool(b) => b.to_string(),
        AttrValue::Opaque(raw) => raw.clone(),
    }
}
