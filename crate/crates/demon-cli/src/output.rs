//! Rendering of results in the two output formats: `text` for humans and
//! `records`, a stable line-oriented key/value form for tooling and
//! golden tests. Field order is fixed in both.

use std::collections::BTreeMap;

use demon::proof::CheckReport;
use demon::semantics::DenoteResult;
use demon::simulate::SimReport;
use demon::value::{Rat, State};

pub fn denote_result(r: &DenoteResult, format: &str) {
    match format {
        "records" => {
            println!("record=denote");
            println!("exact={}", r.exact);
            println!("residual={}", r.residual_bound);
            println!("generators={}", r.value.generator_count());
            for g in r.value.generators() {
                let parts: Vec<String> =
                    g.support().map(|(o, w)| format!("{o} -> {w}")).collect();
                println!("gen={}", parts.join("; "));
            }
        }
        _ => {
            println!(
                "exact: {}   residual bound: {}",
                if r.exact { "yes" } else { "no" },
                r.residual_bound
            );
            println!("{}", r.value.dump());
        }
    }
}

pub fn sim_report(r: &SimReport, format: &str) {
    match format {
        "records" => {
            println!("record=simulate");
            println!("rng={}", r.rng);
            println!("seed={}", r.seed);
            println!("samples={}", r.samples);
            println!("batch_size={}", r.batch_size);
            println!("scheduler={}", r.scheduler);
            println!("nonterminated={}", r.nonterminated);
            for (s, n) in &r.histogram {
                println!("outcome={s}\t{n}");
            }
        }
        _ => {
            println!(
                "rng {} seed {} samples {} batch {} scheduler {}",
                r.rng, r.seed, r.samples, r.batch_size, r.scheduler
            );
            for (s, n) in &r.histogram {
                println!("{s}\t{n}");
            }
            println!("nonterminated\t{}", r.nonterminated);
        }
    }
}

pub fn minterm_bounds(bounds: &BTreeMap<State, Rat>, iters: usize, format: &str) {
    match format {
        "records" => {
            println!("record=minterm");
            println!("iterations={iters}");
            for (s, b) in bounds {
                println!("bound={s}\t{b}");
            }
        }
        _ => {
            println!("termination probability lower bounds after {iters} iterations:");
            for (s, b) in bounds {
                println!("{s}\t{b}");
            }
        }
    }
}

pub fn check_report(r: &CheckReport, format: &str) {
    match format {
        "records" => {
            println!("record=check");
            println!("verdict={:?}", r.verdict);
            println!("open_obligations={}", r.open_obligations());
            for n in &r.nodes {
                println!("node={}\t{}\t{:?}", n.path, n.rule.name(), n.verdict);
            }
        }
        _ => println!("{r}"),
    }
}
