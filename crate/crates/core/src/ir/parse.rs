use std::collections::HashSet;

use super::types::*;
use super::{ParseError, ParseErrorKind};

/// Parse a module in the supported StableHLO text subset.
pub fn parse_module(source: &str) -> Result<HloModule, ParseError> {
    let mut p = Parser::new(source);
    let module = p.module()?;
    if module.function("main").is_none() {
        return Err(p.error_at(0, ParseErrorKind::MissingMain));
    }
    Ok(module)
}

/// Parse a standalone type such as `tensor<4x6xf32>`.
pub fn parse_tensor_type(text: &str) -> Result<TensorType, ParseError> {
    let mut p = Parser::new(text);
    let t = p.tensor_type()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(ParseErrorKind::MalformedType(text.trim().to_string())));
    }
    Ok(t)
}

const RETURN_OPS: [&str; 4] = ["func.return", "return", "stablehlo.return", "mhlo.return"];

enum Stmt {
    Op(HloOperation),
    Return(Vec<String>, Vec<TensorType>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    scopes: Vec<HashSet<String>>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            scopes: Vec::new(),
        }
    }

    // ------------------------------------------------------------------
    // Cursor primitives
    // ------------------------------------------------------------------

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(self.pos, kind)
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { line, column, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error(ParseErrorKind::Syntax(msg.into()))
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            let r = self.rest();
            let trimmed = r.trim_start();
            self.pos += r.len() - trimmed.len();
            if trimmed.starts_with("//") {
                let end = trimmed.find('\n').unwrap_or(trimmed.len());
                self.pos += end;
            } else {
                break;
            }
        }
    }

    fn looking_at(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.looking_at(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            let found: String = self.rest().chars().take(16).collect();
            Err(self.syntax(format!("expected `{s}`, found `{found}`")))
        }
    }

    /// Consume `word` only when it is not followed by an identifier character.
    fn eat_word(&mut self, word: &str) -> bool {
        if !self.looking_at(word) {
            return false;
        }
        let next = self.rest()[word.len()..].chars().next();
        if next.is_some_and(is_id_char) {
            return false;
        }
        self.pos += word.len();
        true
    }

    fn bare_id(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let r = self.rest();
        let first = r.chars().next();
        if !first.is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(self.syntax("expected identifier"));
        }
        let len = r.find(|c: char| !is_id_char(c)).unwrap_or(r.len());
        self.pos += len;
        Ok(&r[..len])
    }

    fn symbol_name(&mut self) -> Result<&'a str, ParseError> {
        self.expect("@")?;
        if self.peek() == Some('"') {
            let start = self.pos;
            self.string_lit()?;
            return Ok(&self.src[start..self.pos]);
        }
        let r = self.rest();
        let len = r.find(|c: char| !is_id_char(c)).unwrap_or(r.len());
        if len == 0 {
            return Err(self.syntax("expected symbol name after `@`"));
        }
        self.pos += len;
        Ok(&r[..len])
    }

    fn ssa_name(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let r = self.rest();
        if !r.starts_with('%') {
            return Err(self.syntax("expected SSA value name"));
        }
        let body = &r[1..];
        let len = body
            .find(|c: char| !(is_id_char(c) || c == '#'))
            .unwrap_or(body.len());
        if len == 0 {
            return Err(self.syntax("empty SSA value name"));
        }
        self.pos += 1 + len;
        Ok(r[..1 + len].to_string())
    }

    fn string_lit(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        if self.bump() != Some('"') {
            return Err(self.syntax("expected string literal"));
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.syntax("unterminated string literal")),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some(h1) if h1.is_ascii_hexdigit() => {
                        let h2 = self
                            .bump()
                            .filter(|c| c.is_ascii_hexdigit())
                            .ok_or_else(|| self.syntax("bad hex escape"))?;
                        let v = u8::from_str_radix(&format!("{h1}{h2}"), 16).unwrap();
                        out.push(v as char);
                    }
                    _ => return Err(self.syntax("bad escape in string literal")),
                },
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }

    fn unsigned(&mut self) -> Result<u64, ParseError> {
        let r = self.rest();
        let len = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
        if len == 0 {
            return Err(self.syntax("expected integer"));
        }
        let v = r[..len]
            .parse()
            .map_err(|_| self.syntax("integer out of range"))?;
        self.pos += len;
        Ok(v)
    }

    /// Scan a balanced chunk of text up to (not including) one of `stops`
    /// at nesting depth zero.
    fn scan_raw(&mut self, stops: &[char]) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut depth: Vec<char> = Vec::new();
        loop {
            let r = self.rest();
            let Some(c) = r.chars().next() else {
                if depth.is_empty() {
                    break;
                }
                return Err(self.syntax("unbalanced brackets in attribute value"));
            };
            if depth.is_empty() && stops.contains(&c) {
                break;
            }
            match c {
                '"' => {
                    self.string_lit()?;
                    continue;
                }
                '-' if r.starts_with("->") => {
                    self.pos += 2;
                    continue;
                }
                '(' => depth.push(')'),
                '[' => depth.push(']'),
                '{' => depth.push('}'),
                '<' => depth.push('>'),
                ')' | ']' | '}' | '>' if depth.pop() != Some(c) => {
                    return Err(self.syntax(format!("unbalanced `{c}` in attribute value")));
                }
                _ => {}
            }
            self.pos += c.len_utf8();
        }
        let raw = self.src[start..self.pos].trim();
        if raw.is_empty() {
            return Err(self.syntax("expected attribute value"));
        }
        Ok(raw)
    }

    // ------------------------------------------------------------------
    // Types
    // ------------------------------------------------------------------

    fn tensor_type(&mut self) -> Result<TensorType, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if !self.rest().starts_with("tensor<") {
            let found: String = self
                .rest()
                .chars()
                .take_while(|c| !c.is_whitespace() && *c != ',' && *c != ')')
                .collect();
            return Err(self.error(ParseErrorKind::MalformedType(found)));
        }
        let close = match self.rest().find('>') {
            Some(i) => i,
            None => {
                return Err(self.error(ParseErrorKind::MalformedType(self.rest().to_string())))
            }
        };
        let text = &self.rest()[..=close];
        let inner = &text["tensor<".len()..text.len() - 1];
        let mut shape = Vec::new();
        let mut rest = inner;
        loop {
            if rest.starts_with('?') {
                return Err(self.error_at(start, ParseErrorKind::DynamicShape(text.to_string())));
            }
            let digits = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            if digits == 0 {
                break;
            }
            let after = &rest[digits..];
            if !after.starts_with('x') {
                return Err(self.error_at(start, ParseErrorKind::MalformedType(text.to_string())));
            }
            let d: u64 = rest[..digits].parse().map_err(|_| {
                self.error_at(start, ParseErrorKind::MalformedType(text.to_string()))
            })?;
            shape.push(d);
            rest = &after[1..];
        }
        let element = if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(self.error_at(start, ParseErrorKind::MalformedType(text.to_string())));
        } else {
            ElementType::from_keyword(rest).ok_or_else(|| {
                self.error_at(start, ParseErrorKind::UnknownElementType(rest.to_string()))
            })?
        };
        self.pos += close + 1;
        Ok(TensorType { shape, element })
    }

    /// `type` or `(type, ...)`; an optional attribute dict may follow each
    /// type when `allow_attrs` is set (function result lists).
    fn type_list(&mut self, allow_attrs: bool) -> Result<Vec<TensorType>, ParseError> {
        if self.eat("(") {
            let mut types = Vec::new();
            if self.eat(")") {
                return Ok(types);
            }
            loop {
                types.push(self.tensor_type()?);
                if allow_attrs && self.looking_at("{") {
                    self.attr_dict()?;
                }
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
            Ok(types)
        } else {
            // a bare result type cannot carry attributes; `{` opens the body
            Ok(vec![self.tensor_type()?])
        }
    }

    // ------------------------------------------------------------------
    // Attributes
    // ------------------------------------------------------------------

    fn attr_dict(&mut self) -> Result<Vec<Attribute>, ParseError> {
        self.expect("{")?;
        let mut attrs = Vec::new();
        if self.eat("}") {
            return Ok(attrs);
        }
        loop {
            let key = self.attr_key()?;
            let value = if self.eat("=") {
                classify_attr(self.scan_raw(&[',', '}'])?)
            } else {
                AttrValue::Bool(true)
            };
            attrs.push(Attribute::new(key, value));
            if self.eat("}") {
                break;
            }
            self.expect(",")?;
        }
        Ok(attrs)
    }

    fn attr_key(&mut self) -> Result<String, ParseError> {
        if self.looking_at("\"") {
            self.string_lit()
        } else {
            Ok(self.bare_id()?.to_string())
        }
    }

    fn push_attrs(
        &self,
        into: &mut Vec<Attribute>,
        attrs: Vec<Attribute>,
        at: usize,
    ) -> Result<(), ParseError> {
        for a in attrs {
            if into.iter().any(|b| b.key == a.key) {
                return Err(self.error_at(at, ParseErrorKind::DuplicateAttribute(a.key)));
            }
            into.push(a);
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // SSA scopes
    // ------------------------------------------------------------------

    fn define(&mut self, name: &str, at: usize) -> Result<(), ParseError> {
        if self.scopes.iter().any(|s| s.contains(name)) {
            return Err(self.error_at(at, ParseErrorKind::DuplicateDefinition(name.to_string())));
        }
        self.scopes
            .last_mut()
            .expect("no open scope")
            .insert(name.to_string());
        Ok(())
    }

    fn check_use(&self, name: &str, at: usize) -> Result<(), ParseError> {
        if self.scopes.iter().any(|s| s.contains(name)) {
            Ok(())
        } else {
            Err(self.error_at(at, ParseErrorKind::UndefinedValue(name.to_string())))
        }
    }

    // ------------------------------------------------------------------
    // Structure
    // ------------------------------------------------------------------

    fn module(&mut self) -> Result<HloModule, ParseError> {
        let mut module = HloModule::default();
        self.skip_aliases();
        if self.eat_word("module") {
            if self.looking_at("@") {
                module.name = Some(self.symbol_name()?.to_string());
            }
            if self.eat_word("attributes") {
                module.attributes = self.attr_dict()?;
            }
            self.expect("{")?;
            self.functions(&mut module, true)?;
            self.expect("}")?;
            self.skip_aliases();
        } else {
            self.functions(&mut module, false)?;
        }
        self.skip_ws();
        if !self.at_end() {
            return Err(self.syntax("unexpected trailing input"));
        }
        Ok(module)
    }

    /// Skip `#alias = ...` definitions (location tables and the like).
    fn skip_aliases(&mut self) {
        while self.looking_at("#") {
            let end = self.rest().find('\n').unwrap_or(self.rest().len());
            self.pos += end;
        }
    }

    fn functions(&mut self, module: &mut HloModule, wrapped: bool) -> Result<(), ParseError> {
        loop {
            self.skip_aliases();
            if self.at_end() || (wrapped && self.looking_at("}")) {
                return Ok(());
            }
            let at = self.pos;
            let f = self.function()?;
            if module.function(&f.name).is_some() {
                return Err(self.error_at(at, ParseErrorKind::DuplicateFunction(f.name)));
            }
            module.functions.push(f);
        }
    }

    fn function(&mut self) -> Result<Function, ParseError> {
        if !self.eat_word("func.func") {
            return Err(self.syntax("expected `func.func`"));
        }
        let visibility = ["public", "private", "nested"]
            .into_iter()
            .find(|v| self.eat_word(v))
            .map(str::to_string);
        let name = self.symbol_name()?.to_string();

        self.scopes.push(HashSet::new());
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                let at = self.pos;
                let arg_name = self.ssa_name()?;
                self.define(&arg_name, at)?;
                self.expect(":")?;
                let ty = self.tensor_type()?;
                let attributes = if self.looking_at("{") {
                    self.attr_dict()?
                } else {
                    Vec::new()
                };
                args.push(Argument {
                    name: arg_name,
                    ty,
                    attributes,
                });
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let result_types = if self.eat("->") {
            self.type_list(true)?
        } else {
            Vec::new()
        };
        if self.eat_word("attributes") {
            self.attr_dict()?;
        }
        self.expect("{")?;
        let (body, return_names, return_types) = self.block()?;
        self.expect("}")?;
        self.scopes.pop();

        Ok(Function {
            name,
            visibility,
            args,
            result_types,
            body,
            return_names,
            return_types,
        })
    }

    /// Statements up to the closing brace. The terminator, if present, must
    /// be the last statement.
    #[allow(clippy::type_complexity)]
    fn block(&mut self) -> Result<(Vec<HloOperation>, Vec<String>, Vec<TensorType>), ParseError> {
        let mut ops = Vec::new();
        loop {
            if self.looking_at("}") {
                return Ok((ops, Vec::new(), Vec::new()));
            }
            match self.statement(ops.len())? {
                Stmt::Op(op) => ops.push(op),
                Stmt::Return(names, types) => {
                    if !self.looking_at("}") {
                        return Err(self.syntax("operations after block terminator"));
                    }
                    return Ok((ops, names, types));
                }
            }
        }
    }

    fn statement(&mut self, id: usize) -> Result<Stmt, ParseError> {
        let stmt_at = {
            self.skip_ws();
            self.pos
        };
        let mut results: Vec<(String, usize)> = Vec::new();
        if self.looking_at("%") {
            loop {
                let at = self.pos;
                let name = self.ssa_name()?;
                if self.eat(":") {
                    self.skip_ws();
                    let n = self.unsigned()?;
                    for i in 0..n {
                        results.push((format!("{name}#{i}"), at));
                    }
                } else {
                    results.push((name, at));
                }
                if self.eat("=") {
                    break;
                }
                self.expect(",")?;
            }
        }

        self.skip_ws();
        let generic = self.peek() == Some('"');
        let op_name = if generic {
            self.string_lit()?
        } else {
            self.bare_id()?.to_string()
        };

        if RETURN_OPS.contains(&op_name.as_str()) {
            if !results.is_empty() {
                return Err(self.error_at(stmt_at, ParseErrorKind::Syntax(
                    "terminator cannot define results".into(),
                )));
            }
            return self.return_stmt(generic);
        }

        let mut op = HloOperation {
            id,
            result_names: Vec::new(),
            op_name,
            operand_names: Vec::new(),
            attributes: Vec::new(),
            operand_types: Vec::new(),
            result_types: Vec::new(),
            region: None,
        };
        if generic {
            self.generic_body(&mut op)?;
        } else {
            self.sugared_body(&mut op, results.len())?;
        }
        if self.eat_word("loc") {
            self.expect("(")?;
            self.scan_raw(&[')'])?;
            self.expect(")")?;
        }

        if op.result_types.len() != results.len() {
            return Err(self.error_at(stmt_at, ParseErrorKind::Arity(format!(
                "{} defines {} results but its type lists {}",
                op.op_name,
                results.len(),
                op.result_types.len()
            ))));
        }
        if op.operand_types.len() != op.operand_names.len() {
            return Err(self.error_at(stmt_at, ParseErrorKind::Arity(format!(
                "{} has {} operands but its type lists {}",
                op.op_name,
                op.operand_names.len(),
                op.operand_types.len()
            ))));
        }
        for (name, at) in results {
            self.define(&name, at)?;
            op.result_names.push(name);
        }
        Ok(Stmt::Op(op))
    }

    fn return_stmt(&mut self, generic: bool) -> Result<Stmt, ParseError> {
        let mut names = Vec::new();
        let mut types = Vec::new();
        if generic {
            self.expect("(")?;
            if !self.eat(")") {
                loop {
                    names.push(self.operand()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            self.expect(":")?;
            types = self.type_list(false)?;
            self.expect("->")?;
            self.expect("(")?;
            self.expect(")")?;
        } else {
            if self.looking_at("%") {
                loop {
                    names.push(self.operand()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            if self.eat(":") {
                loop {
                    types.push(self.tensor_type()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
        }
        if !types.is_empty() && types.len() != names.len() {
            return Err(self.error(ParseErrorKind::Arity(format!(
                "return of {} values lists {} types",
                names.len(),
                types.len()
            ))));
        }
        Ok(Stmt::Return(names, types))
    }

    fn operand(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ssa_name()?;
        self.check_use(&name, at)?;
        Ok(name)
    }

    fn generic_body(&mut self, op: &mut HloOperation) -> Result<(), ParseError> {
        self.expect("(")?;
        if !self.eat(")") {
            loop {
                op.operand_names.push(self.operand()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        if self.eat("<{") {
            self.pos -= 1;
            let at = self.pos;
            let props = self.attr_dict()?;
            self.expect(">")?;
            self.push_attrs(&mut op.attributes, props, at)?;
        }
        if self.eat("({") {
            self.pos -= 1;
            op.region = Some(self.region()?);
            if self.looking_at(",") {
                return Err(self.syntax("operations with more than one region are not supported"));
            }
            self.expect(")")?;
        }
        if self.looking_at("{") {
            let at = self.pos;
            let attrs = self.attr_dict()?;
            self.push_attrs(&mut op.attributes, attrs, at)?;
        }
        self.expect(":")?;
        self.expect("(")?;
        self.pos -= 1;
        op.operand_types = self.type_list(false)?;
        self.expect("->")?;
        op.result_types = self.type_list(false)?;
        Ok(())
    }

    /// `stablehlo.name %a, key = value, positional : type-signature`
    fn sugared_body(&mut self, op: &mut HloOperation, n_results: usize) -> Result<(), ParseError> {
        let mut positional = 0usize;
        if !self.looking_at(":") {
            loop {
                let at = {
                    self.skip_ws();
                    self.pos
                };
                if self.looking_at("%") {
                    op.operand_names.push(self.operand()?);
                } else if self.looking_at("@") {
                    let callee = self.symbol_name()?.trim_matches('"').to_string();
                    self.push_attrs(
                        &mut op.attributes,
                        vec![Attribute::new("call_target_name", AttrValue::Str(callee))],
                        at,
                    )?;
                    self.expect("(")?;
                    if !self.eat(")") {
                        loop {
                            op.operand_names.push(self.operand()?);
                            if self.eat(")") {
                                break;
                            }
                            self.expect(",")?;
                        }
                    }
                } else if self.looking_at("{") {
                    let attrs = self.attr_dict()?;
                    self.push_attrs(&mut op.attributes, attrs, at)?;
                } else if let Some(key) = self.keyed_item() {
                    let raw = self.scan_raw(&[',', ':'])?;
                    let attrs = sugared_attr(&key, raw);
                    self.push_attrs(&mut op.attributes, attrs, at)?;
                } else {
                    let raw = self.scan_raw(&[',', ':'])?;
                    let key = match (op.short_name(), positional) {
                        ("constant", 0) => "value".to_string(),
                        ("compare", 0) => "comparison_direction".to_string(),
                        _ => format!("attr{positional}"),
                    };
                    positional += 1;
                    self.push_attrs(
                        &mut op.attributes,
                        vec![Attribute::new(key, classify_attr(raw))],
                        at,
                    )?;
                }
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(":")?;
        if self.looking_at("(") {
            op.operand_types = self.type_list(false)?;
            self.expect("->")?;
            op.result_types = self.type_list(false)?;
        } else {
            let t = self.tensor_type()?;
            op.operand_types = vec![t.clone(); op.operand_names.len()];
            op.result_types = vec![t; n_results];
        }
        Ok(())
    }

    /// Lookahead for `ident =` (but not `==`). Consumes it when present.
    fn keyed_item(&mut self) -> Option<String> {
        let save = self.pos;
        if let Ok(id) = self.bare_id() {
            let id = id.to_string();
            if self.looking_at("=") && !self.looking_at("==") {
                self.pos += 1;
                return Some(id);
            }
        }
        self.pos = save;
        None
    }

    fn region(&mut self) -> Result<Region, ParseError> {
        self.expect("{")?;
        self.scopes.push(HashSet::new());
        let mut region = Region::default();
        if self.eat("^") {
            self.bare_id()?;
            if self.eat("(") && !self.eat(")") {
                loop {
                    let at = self.pos;
                    let name = self.ssa_name()?;
                    self.define(&name, at)?;
                    self.expect(":")?;
                    let ty = self.tensor_type()?;
                    region.args.push((name, ty));
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            self.expect(":")?;
        }
        let (ops, names, types) = self.block()?;
        region.ops = ops;
        region.return_names = names;
        region.return_types = types;
        self.expect("}")?;
        self.scopes.pop();
        Ok(region)
    }
}

fn is_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$' | '-')
}

/// Map sugared keyword attributes onto their generic names.
fn sugared_attr(key: &str, raw: &str) -> Vec<Attribute> {
    if let ("contracting_dims" | "batching_dims", Some((l, r))) = (key, raw.split_once(" x ")) {
        if let (Some(AttrValue::IntList(l)), Some(AttrValue::IntList(r))) =
            (int_lists(l.trim()), int_lists(r.trim()))
        {
            let what = if key == "contracting_dims" {
                "contracting"
            } else {
                "batching"
            };
            return vec![
                Attribute::new(format!("lhs_{what}_dimensions"), AttrValue::IntList(l)),
                Attribute::new(format!("rhs_{what}_dimensions"), AttrValue::IntList(r)),
            ];
        }
    }
    vec![Attribute::new(key, classify_attr(raw))]
}

/// Interpret raw attribute text; anything unrecognized stays verbatim.
pub(crate) fn classify_attr(raw: &str) -> AttrValue {
    let raw = raw.trim();
    match raw {
        "true" => return AttrValue::Bool(true),
        "false" => return AttrValue::Bool(false),
        _ => {}
    }
    if raw.starts_with('"') {
        let mut p = Parser::new(raw);
        if let Ok(s) = p.string_lit() {
            if p.at_end() {
                return AttrValue::Str(s);
            }
        }
    }
    let (body, ty) = match raw.rsplit_once(" : ") {
        Some((b, t)) => (b.trim(), Some(t.trim())),
        None => (raw, None),
    };
    if let Some(ty) = ty {
        let int_ty = ElementType::from_keyword(ty).is_some_and(|e| e.is_integer());
        if int_ty {
            if let Ok(v) = body.parse::<i64>() {
                return AttrValue::Int(v);
            }
        }
        if let Some(inner) = body.strip_prefix("dense<").and_then(|b| b.strip_suffix('>')) {
            let int_tensor = parse_tensor_type(ty).is_ok_and(|t| t.element.is_integer());
            if int_tensor && inner.trim_start().starts_with('[') {
                if let Some(v) = int_lists(inner.trim()) {
                    return v;
                }
            }
        }
        return AttrValue::Opaque(raw.to_string());
    }
    if let Ok(v) = raw.parse::<i64>() {
        return AttrValue::Int(v);
    }
    if raw.starts_with('[') {
        if let Some(v) = int_lists(raw) {
            return v;
        }
    }
    if let Some(inner) = raw.strip_prefix("array<i64").and_then(|b| b.strip_suffix('>')) {
        let inner = inner.trim();
        if inner.is_empty() {
            return AttrValue::IntList(Vec::new());
        }
        if let Some(items) = inner.strip_prefix(':') {
            if let Some(v) = ints(items) {
                return AttrValue::IntList(v);
            }
        }
    }
    AttrValue::Opaque(raw.to_string())
}

fn ints(s: &str) -> Option<Vec<i64>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

/// `[1, 2]` -> IntList, `[[0, 1], [2, 3]]` -> IntLists.
fn int_lists(s: &str) -> Option<AttrValue> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?.trim();
    if !inner.starts_with('[') {
        return ints(inner).map(AttrValue::IntList);
    }
    let mut groups = Vec::new();
    let mut rest = inner;
    loop {
        let body = rest.strip_prefix('[')?;
        let close = body.find(']')?;
        groups.push(ints(&body[..close])?);
        rest = body[close + 1..].trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest.strip_prefix(',')?.trim_start();
    }
    Some(AttrValue::IntLists(groups))
}
