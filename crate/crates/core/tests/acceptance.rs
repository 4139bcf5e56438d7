//! One PASS/FAIL line per acceptance criterion, with its checks below.
//! Exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use caustica::suite::{self, Report};
use caustica::{Execution, Result};

struct Criterion {
    id: u32,
    title: &'static str,
    budget_s: f64,
    run: fn(Execution) -> Result<Report>,
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "multiplier/quadrature equivalence",
            budget_s: 10.0,
            run: |exec| suite::apply_equivalence(&suite::ApplyConfig { exec, ..Default::default() }),
        },
        Criterion {
            id: 2,
            title: "normal-operator kernel",
            budget_s: 60.0,
            run: |exec| suite::normal_kernel(&suite::KernelConfig { exec, ..Default::default() }),
        },
        Criterion {
            id: 3,
            title: "decomposition into A0 + F+ + F-",
            budget_s: 120.0,
            run: |exec| suite::decomposition(&suite::DecomposeConfig { exec, ..Default::default() }),
        },
        Criterion {
            id: 4,
            title: "cancellation of singularities",
            budget_s: 120.0,
            run: |exec| suite::cancellation(&suite::CancelConfig { exec, ..Default::default() }),
        },
        Criterion {
            id: 5,
            title: "conjugate-point detection",
            budget_s: 10.0,
            run: suite::conjugate_detection,
        },
        Criterion {
            id: 6,
            title: "classification",
            budget_s: 30.0,
            run: suite::classification,
        },
        Criterion {
            id: 7,
            title: "conjugate locus geometry",
            budget_s: 30.0,
            run: |exec| suite::locus_geometry(&suite::LocusConfig { exec, ..Default::default() }),
        },
        Criterion {
            id: 8,
            title: "conormal bundle",
            budget_s: 30.0,
            run: |exec| suite::conormal_geometry(100, exec),
        },
        Criterion {
            id: 9,
            title: "canonical graph",
            budget_s: 30.0,
            run: suite::canonical_graph,
        },
        Criterion {
            id: 10,
            title: "square-root kernel law",
            budget_s: 120.0,
            run: |exec| suite::sqrt_law(&suite::SqrtLawConfig { exec, ..Default::default() }).map(|r| r.0),
        },
        Criterion {
            id: 11,
            title: "sphere kernel",
            budget_s: 30.0,
            run: |exec| suite::sphere_kernel(&suite::SphereConfig { exec, ..Default::default() }),
        },
        Criterion {
            id: 12,
            title: "diagonal symbol",
            budget_s: 60.0,
            run: |exec| suite::diagonal_symbol(&suite::DiagonalConfig { exec, ..Default::default() }),
        },
    ]
}

fn main() -> ExitCode {
    let exec = Execution::default();
    let mut failed = 0;
    for c in criteria() {
        let start = Instant::now();
        let result = (c.run)(exec);
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < c.budget_s;
        let (ok, mut details): (bool, Vec<String>) = match &result {
            Ok(r) => (
                r.passed() && in_time,
                r.checks
                    .iter()
                    .map(|k| {
                        let verdict = if k.pass { "ok" } else { "violated" };
                        format!("{}: measured {:.6e}, expected {} ({verdict})", k.name, k.measured, k.expected)
                    })
                    .collect(),
            ),
            Err(e) => (false, vec![format!("error: {e}")]),
        };
        if !in_time {
            details.push(format!("runtime {secs:.1} s exceeds the {} s budget", c.budget_s));
        }
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {} ({secs:.1} s, budget {} s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.budget_s
        );
        for d in details {
            println!("       {d}");
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
