mod args;
mod output;

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::process::ExitCode;
use std::time::Instant;

use casgd::comm::{LayoutKind, VirtualCluster};
use casgd::cost::{
    crossover_s, modeled_time, theoretical_cost, Algorithm, CostParams, MachineModel,
};
use casgd::profile::{Phase, PhaseTimes};
use casgd::solver::{self, relative_solution_error, Budget, SolverConfig, SolverRun};
use casgd::sparse::{parse_libsvm, write_libsvm, LabeledDataset};
use casgd::{synth, Error, Result};
use clap::Parser;
use flate2::read::GzDecoder;

use args::{
    Algo, BenchArgs, Cli, Command, CompareArgs, CostsArgs, DataArgs, GenerateArgs, Kind,
    SolverArgs, TrainArgs,
};
use output::{fmt_f64, write_atomically};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Compare(a) => compare(a),
        Command::Costs(a) => costs(a),
        Command::Bench(a) => bench(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &DataArgs) -> Result<LabeledDataset> {
    let file = File::open(&args.data)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", args.data.display())))?;
    let reader: Box<dyn BufRead> = if args.gzip {
        Box::new(BufReader::new(GzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    parse_libsvm(reader, args.labels, args.num_features)
}

fn config(d: &LabeledDataset, s: &SolverArgs, algo: Algo, s_step: usize) -> SolverConfig {
    let batch = if algo == Algo::Gd {
        d.num_points()
    } else {
        s.batch
    };
    let unroll = if algo == Algo::Casgd { s_step } else { 1 };
    SolverConfig::new(s.eta, batch, unroll, Budget::Epochs(s.epochs))
        .with_layout(s.layout.into(), s.procs)
        .with_seed(s.seed)
}

fn solve(
    d: &LabeledDataset,
    cfg: &SolverConfig,
    casgd: bool,
    times: Option<&mut PhaseTimes>,
) -> Result<SolverRun> {
    let mut cluster = VirtualCluster::partition(d, cfg.layout, cfg.ranks)?;
    let mut stream = solver::batch_stream(&cluster, cfg)?;
    if casgd {
        solver::run_casgd_with(&mut cluster, cfg, &mut stream, times)
    } else {
        solver::run_sgd_with(&mut cluster, cfg, &mut stream, times)
    }
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let d = load(&a.data)?;
    let cfg = config(&d, &a.solver, a.algo, a.s_step);
    let run = solve(&d, &cfg, a.algo == Algo::Casgd, None)?;
    if let Some(path) = &a.trace {
        let mut csv = String::from("epoch,loss,accuracy,flops,words,messages,collectives\n");
        for r in &run.trace {
            let c = &r.counters;
            csv += &format!(
                "{},{},{},{},{},{},{}\n",
                r.epoch,
                fmt_f64(r.loss),
                fmt_f64(r.accuracy),
                c.flops,
                c.words_moved,
                c.messages,
                c.collectives
            );
        }
        write_atomically(path, csv.as_bytes())?;
    }
    let last = run.trace.last().expect("trace holds the initial state");
    println!("loss {}", fmt_f64(last.loss));
    println!("accuracy {}", fmt_f64(last.accuracy));
    Ok(ExitCode::SUCCESS)
}

fn compare(a: CompareArgs) -> Result<ExitCode> {
    let d = load(&a.data)?;
    let row = a.solver.layout == args::Layout::Row;
    let base = config(&d, &a.solver, Algo::Sgd, 1);
    let shared = if row {
        None
    } else {
        Some(solve(&d, &base, false, None)?)
    };
    let mut csv =
        String::from("epoch,s,rel_solution_error,loss_sgd,loss_casgd,acc_sgd,acc_casgd\n");
    let mut worst = 0.0f64;
    for &s in &a.s_list {
        let cfg = SolverConfig { s, ..base.clone() }.with_epoch_alignment(if row { s } else { 1 });
        let own;
        let sgd = match &shared {
            Some(run) => run,
            None => {
                own = solve(&d, &cfg, false, None)?;
                &own
            }
        };
        let ca = solve(&d, &cfg, true, None)?;
        if sgd.trace.len() != ca.trace.len() {
            return Err(Error::Config(format!("trace lengths differ at s={s}")));
        }
        for (i, (u, v)) in sgd.trace.iter().zip(&ca.trace).enumerate() {
            let err = relative_solution_error(&sgd.solutions[i], &ca.solutions[i])?;
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            csv += &format!(
                "{},{},{},{},{},{},{}\n",
                u.epoch,
                s,
                fmt_f64(err),
                fmt_f64(u.loss),
                fmt_f64(v.loss),
                fmt_f64(u.accuracy),
                fmt_f64(v.accuracy)
            );
        }
    }
    match &a.out {
        Some(path) => write_atomically(path, csv.as_bytes())?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    if worst > a.tolerance {
        eprintln!(
            "relative solution error {} exceeds tolerance {}",
            fmt_f64(worst),
            fmt_f64(a.tolerance)
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn costs(a: CostsArgs) -> Result<ExitCode> {
    if a.b == 0 {
        return Err(Error::Config("b must be positive".into()));
    }
    let params = CostParams {
        m: a.m,
        n: a.n,
        p: a.p,
        b: a.b,
        s: a.s,
        h: a.epochs * a.m.div_ceil(a.b),
        f: a.f,
    };
    params.validate().map_err(Error::Config)?;
    for (name, v) in [
        ("alpha", a.alpha),
        ("beta", a.beta),
        ("gamma", a.gamma),
        ("omega", a.omega),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Config(format!(
                "{name} must be finite and non-negative"
            )));
        }
    }
    let machine = MachineModel {
        alpha: a.alpha,
        beta: a.beta,
        gamma: a.gamma,
        omega: a.omega,
    };
    println!("algo,layout,flops,words,messages,collectives,sig_evals,modeled_time");
    for (layout, lname) in [
        (LayoutKind::BlockColumn, "col"),
        (LayoutKind::BlockRow, "row"),
    ] {
        for (algo, aname) in [(Algorithm::Sgd, "sgd"), (Algorithm::CaSgd, "casgd")] {
            let c = theoretical_cost(&params, algo, layout);
            println!(
                "{aname},{lname},{},{},{},{},{},{}",
                c.flops,
                c.words_moved,
                c.messages,
                c.collectives,
                c.sig_evals,
                fmt_f64(modeled_time(&c, &machine))
            );
        }
    }
    for (layout, lname) in [
        (LayoutKind::BlockColumn, "col"),
        (LayoutKind::BlockRow, "row"),
    ] {
        println!(
            "crossover_s,{lname},{}",
            crossover_s(&params, &machine, layout, a.s_max)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    if a.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let d = load(&a.data)?;
    let cfg = config(&d, &a.solver, a.algo, a.s_step);
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); Phase::ALL.len() + 1];
    for _ in 0..a.repeats {
        let mut times = PhaseTimes::default();
        let start = Instant::now();
        solve(&d, &cfg, a.algo == Algo::Casgd, Some(&mut times))?;
        let wall = start.elapsed().as_secs_f64();
        for (k, phase) in Phase::ALL.iter().enumerate() {
            samples[k].push(times.get(*phase).as_secs_f64());
        }
        samples[Phase::ALL.len()].push(wall);
    }
    let names = Phase::ALL.iter().map(|p| p.name()).chain(["total"]);
    let mut csv = String::from("phase,mean_seconds,stddev_seconds\n");
    for (name, xs) in names.zip(&samples) {
        let (mean, sd) = output::mean_stddev(xs);
        let sd = sd.map(fmt_f64).unwrap_or_default();
        csv += &format!("{name},{},{sd}\n", fmt_f64(mean));
    }
    match &a.out {
        Some(path) => write_atomically(path, csv.as_bytes())?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let text = match a.kind {
        Kind::Gaussian => {
            let d = synth::sparse_gaussian(a.m, a.n, a.density, a.seed)?;
            let mut buf = Vec::new();
            write_libsvm(&d, &mut buf)?;
            buf
        }
        Kind::Mushrooms => synth::mushrooms_like_libsvm(a.m, a.seed).into_bytes(),
    };
    write_atomically(&a.out, &text)?;
    Ok(ExitCode::SUCCESS)
}
