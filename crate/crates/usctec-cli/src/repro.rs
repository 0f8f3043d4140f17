//! `usctec repro`: re-runs the built-in reference systems and prints one
//! PASS/FAIL line per check. Exits 3 if anything fails.

use usctec::demo;
use usctec::division::{divide, DivisionProblem};
use usctec::load::{solve_lp, LoadProblem};
use usctec::placement::place;
use usctec::rational::Rat;
use usctec::simulator::{compare_strategies, verify_round, RoundConfig, Strategy};

use crate::error::CliError;
use crate::outln;

fn r(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, shown: impl std::fmt::Display, ok: bool) {
        if ok {
            outln!("PASS {name} = {shown}");
        } else {
            outln!("FAIL {name} = {shown}");
            self.failures += 1;
        }
    }

    fn exact<T: PartialEq + std::fmt::Display>(&mut self, name: &str, got: T, want: T) {
        let ok = got == want;
        if ok {
            self.check(name, got, true);
        } else {
            self.check(name, format!("{got} (expected {want})"), false);
        }
    }

    fn close(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check(
            name,
            format!("{got:.5} (reference {want})"),
            (got - want).abs() < tol,
        );
    }
}

pub fn run() -> Result<(), CliError> {
    let mut report = Report { failures: 0 };

    // six machines, full storage: exact water-fill and division
    let (params1, dist1) = demo::example1();
    let solution = solve_lp(&LoadProblem {
        total: Rat::from_int(params1.replication() as i64),
        speeds: dist1.realizations[0].realization.clone(),
        caps: vec![Rat::one(); params1.machines],
    })?;
    report.exact("Example1.c", solution.c.clone(), r(1, 8));
    report.exact(
        "Example1.theta",
        format!("{:?}", solution.theta.iter().map(ToString::to_string).collect::<Vec<_>>()),
        format!("{:?}", ["3/8", "3/8", "1/2", "1/2", "5/8", "5/8"]),
    );
    let division = divide(&DivisionProblem {
        theta: solution.theta,
        rho: Rat::one(),
        replication: params1.replication(),
    })?;
    report.exact(
        "Example1.gamma",
        format!("{:?}", division.gamma.iter().map(ToString::to_string).collect::<Vec<_>>()),
        format!("{:?}", ["3/8", "1/4", "1/8", "1/8", "1/8"]),
    );
    report.exact(
        "Example1.supports",
        format!("{:?}", division.supports),
        format!("{:?}", [[0usize, 4, 5], [2, 3, 4], [1, 2, 5], [1, 2, 3], [1, 3, 5]]),
    );

    // six machines, capped storage: overflow trace
    let (params2, dist2) = demo::example2();
    let placement = place(&params2, &dist2)?;
    report.exact("Example2.rho_hat", placement.commits[0].rho_hat.clone(), r(3, 5));
    report.exact(
        "Example2.overflowed",
        format!("{:?}", placement.commits[0].overflowed),
        "[0]".to_owned(),
    );
    report.exact("Example2.passes", placement.passes, 2);
    report.exact("Example2.machine0", placement.storage[0].measure(), r(3, 5));
    report.exact(
        "Example2.gamma1",
        format!("{:?}", placement.schemes[0].gamma.iter().map(ToString::to_string).collect::<Vec<_>>()),
        format!("{:?}", ["3/8", "9/40", "6/35", "4/35", "4/35"]),
    );

    // twelve-machine sweep against the reference columns
    let (base, dist) = demo::table1();
    let qs: Vec<usize> = (6..=12).collect();
    let rows = compare_strategies(&base, &dist, &qs)?;
    let cyclic_ref = [0.07235, 0.06072, 0.05371, 0.05101, 0.04927, 0.04812, 0.04766];
    let usctec_time_ref = [0.09164, 0.04812, 0.04766, 0.04766, 0.04766, 0.04766, 0.04766];
    let usctec_storage_ref = [5.16591, 5.23310, 5.23480, 5.23480, 5.23480, 5.23480, 5.23480];
    let mut plateau: Vec<(Rat, Rat)> = Vec::new();
    for (i, q) in qs.iter().enumerate() {
        let cyclic = rows
            .iter()
            .find(|row| row.q == *q && row.strategy.starts_with("cyclic"))
            .expect("cyclic row");
        let usctec = rows
            .iter()
            .find(|row| row.q == *q && row.strategy == "usctec")
            .expect("usctec row");
        report.close(
            &format!("Table1.cyclic[{q}].time"),
            cyclic.expected_time.to_f64(),
            cyclic_ref[i],
            1e-4,
        );
        // Q = 6 cascades through several tie-break-sensitive overflow
        // commits; wider band, see README
        let (ttol, stol) = if *q == 6 { (2e-3, 5e-2) } else { (1e-3, 1e-2) };
        report.close(
            &format!("Table1.usctec[{q}].time"),
            usctec.expected_time.to_f64(),
            usctec_time_ref[i],
            ttol,
        );
        report.close(
            &format!("Table1.usctec[{q}].storage"),
            usctec.storage_size.to_f64(),
            usctec_storage_ref[i],
            stol,
        );
        if *q == 12 {
            report.exact("Table1.cyclic[12].exact", cyclic.expected_time.clone(), r(189, 3965));
        }
        if *q >= 8 {
            plateau.push((usctec.storage_size.clone(), usctec.expected_time.clone()));
        }
    }
    report.check(
        "Table1.plateau",
        format!("{} / {}", plateau[0].0, plateau[0].1),
        plateau.iter().all(|pair| *pair == plateau[0]),
    );

    // one coded round per realization on both six-machine systems
    for (name, params, dist) in [
        ("Example1", params1, dist1),
        ("Example2", params2.clone(), dist2.clone()),
    ] {
        let verify = verify_round(&params, &dist, &Strategy::Usctec, &RoundConfig::default())?;
        report.check(
            &format!("{name}.coded_round"),
            format!("seed {} over {} realizations", verify.seed, verify.rounds.len()),
            verify.passed(),
        );
    }

    if report.failures > 0 {
        Err(CliError::acceptance(format!(
            "{} reproduction check(s) failed",
            report.failures
        )))
    } else {
        Ok(())
    }
}
