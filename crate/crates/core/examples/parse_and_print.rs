//! Parse a StableHLO fragment and print it back in generic form.

use hlosim::ir::{parse_module, print_module};

fn main() {
    let src = include_str!("../fixtures/matmul_allreduce.mlir");
    let module = parse_module(src).expect("fixture parses");
    for op in &module.main().body {
        println!(
            "{:>2} {:<24} {} operand(s) -> {:?}",
            op.id,
            op.op_name,
            op.operand_names.len(),
            op.result_types.iter().map(|t| t.to_string()).collect::<Vec<_>>()
        );
    }
    println!("\n{}", print_module(&module));
}
