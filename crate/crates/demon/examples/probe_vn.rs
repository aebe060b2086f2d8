use std::time::Instant;

fn find_while(cmd: &demon::syntax::Cmd) -> Option<(&demon::syntax::Exp, &demon::syntax::Cmd)> {
    use demon::syntax::Cmd;
    match cmd {
        Cmd::While(g, b) => Some((g, b)),
        Cmd::Seq(a, b) => find_while(a).or_else(|| find_while(b)),
        _ => None,
    }
}

fn main() {
    let text = std::fs::read_to_string("corpus/von_neumann.dmn").unwrap();
    let prog = demon::syntax::parse_program(&text).unwrap();
    let sigma = {
        let vals: Vec<demon::value::Value> = (0..prog.table.len())
            .map(|i| prog.table.domain(i).unwrap()[0].clone())
            .collect();
        demon::value::State::new(std::sync::Arc::clone(&prog.table), vals)
    };
    let (guard, body) = find_while(&prog.cmd).unwrap();
    let cfg = demon::semantics::EngineConfig::default();
    for n in 0..=9 {
        let t = Instant::now();
        let set = demon::semantics::loop_iterate(body, guard, n, &sigma, &cfg).unwrap();
        println!(
            "iterate {n}: {} generators, residual {}, {:?}",
            set.generator_count(),
            set.residual_bound(),
            t.elapsed(),
        );
    }
}
