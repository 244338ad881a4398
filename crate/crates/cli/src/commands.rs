use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use ere_core::crossing::{find_crossings, CrossingRecord, CrossingStatus, CrossingWindow, ScanSetup};
use ere_core::eigensolve::ground_state_with;
use ere_core::entangle::{majorizes, reduced_spectrum, renyi_curve, renyi_dominance, Dominance};
use ere_core::io;
use ere_core::scan::{derivative_curve, excited_state_comparison, finite_size_scaling, param_grid, sweep, SweepConfig};
use ere_core::{Error, Result};

use crate::args::{Cli, Command, CrossArgs, DerivativeArgs, EntropyArgs, FssArgs, LoccArgs, ModelArgs, RangeArgs, SweepArgs, WindowArgs};

/// Like `println!`, but a closed stdout (e.g. piped into `head`) is not fatal.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    version: &'a str,
    config: Value,
    wall_time_s: f64,
    outputs: Vec<String>,
}

/// Collects output files under the `--out` directory.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn std::io::Write) -> Result<()>) -> Result<()> {
        let mut w = io::create(&self.dir.join(name))?;
        f(&mut w)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| io::write_json(w, value))
    }

    fn finish(mut self, command: &str, config: Value, started: Instant) -> Result<()> {
        let name = format!("{command}_manifest.json");
        let manifest = RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            wall_time_s: started.elapsed().as_secs_f64(),
            outputs: self.files.clone(),
        };
        let mut w = io::create(&self.dir.join(&name))?;
        io::write_json(&mut w, &manifest)?;
        self.files.push(name);
        for f in &self.files {
            say!("wrote {}", self.dir.join(f).display());
        }
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let name = cli.command.name();
    match &cli.command {
        Command::Entropy(a) => entropy(a, started, name),
        Command::Cross(a) => cross(a, started, name),
        Command::Sweep(a) => run_sweep(a, started, name),
        Command::Fss(a) => fss(a, started, name),
        Command::Excited(a) => excited(a, started, name),
        Command::Locc(a) => locc(a, started, name),
        Command::Derivative(a) => derivative(a, started, name),
    }
}

fn setup(model: &ModelArgs, param: &str, window: &WindowArgs) -> Result<ScanSetup> {
    let mut s = ScanSetup::new(model.spec(&[], Some(param))?, param)?.with_window(window.window()?);
    s.partition = model.partition()?;
    s.solver = model.solver();
    s.validate()?;
    Ok(s)
}

fn window_json(w: &CrossingWindow) -> Value {
    serde_json::to_value(w).unwrap_or(Value::Null)
}

fn entropy(a: &EntropyArgs, started: Instant, name: &str) -> Result<()> {
    let spec = a.model.spec(&[], None)?;
    let part = a.model.partition()?;
    let window = a.window.window()?;
    let alphas = window.grid()?;
    let solver = a.model.solver();

    let gs = ground_state_with(&spec, &solver)?;
    let spectrum = reduced_spectrum(&gs.state, &part)?;
    let curve = renyi_curve(&spectrum, &alphas)?;

    let mut out = Outputs::new(&a.out.out);
    out.write("entropy.csv", |w| io::write_curve(w, &curve))?;
    out.write("spectrum.csv", |w| io::write_spectrum(w, &spectrum))?;
    say!(
        "{spec}: E0 = {:.12}, S_1 = {:.12} bits, rank {}",
        gs.energy,
        spectrum.renyi(1.0)?,
        spectrum.rank()
    );
    let config = json!({
        "model": spec,
        "partition": part,
        "window": window_json(&window),
        "solver": solver,
    });
    out.finish(name, config, started)
}

fn status_word(s: CrossingStatus) -> &'static str {
    match s {
        CrossingStatus::Crossed => "Crossed",
        CrossingStatus::NoCross => "NoCross",
        CrossingStatus::Identical => "Identical",
    }
}

fn cross(a: &CrossArgs, started: Instant, name: &str) -> Result<()> {
    let spec_a = a.model.spec(&a.a.0, None)?;
    let spec_b = a.model.spec(&a.b.0, None)?;
    let part = a.model.partition()?;
    let window = a.window.window()?;
    let solver = a.model.solver();

    let spectra = [spec_a, spec_b]
        .iter()
        .map(|s| reduced_spectrum(&ground_state_with(s, &solver)?.state, &part))
        .collect::<Result<Vec<_>>>()?;
    let crossing = find_crossings(&spectra[0], &spectra[1], &window)?;
    let alphas: Vec<String> = crossing.alphas.iter().map(|x| format!("{x:.4}")).collect();
    say!(
        "{spec_a} vs {spec_b}: {}{}",
        status_word(crossing.status),
        if alphas.is_empty() {
            String::new()
        } else {
            format!(" at alpha = {}", alphas.join(", "))
        }
    );
    let record = json!({
        "a": spec_a,
        "b": spec_b,
        "crossing": crossing,
    });
    let mut out = Outputs::new(&a.out.out);
    out.json("cross.json", &record)?;
    let config = json!({
        "a": spec_a,
        "b": spec_b,
        "partition": part,
        "window": window_json(&window),
        "solver": solver,
    });
    out.finish(name, config, started)
}

fn sweep_config(r: &RangeArgs, refine: usize) -> Result<SweepConfig> {
    let param = r.param();
    SweepConfig::new(setup(&r.model, &param, &r.window)?, r.start, r.stop, r.step)?.with_refine_levels(refine)
}

fn run_sweep(a: &SweepArgs, started: Instant, name: &str) -> Result<()> {
    let cfg = sweep_config(&a.range, a.refine)?;
    let outcome = sweep(&cfg)?;
    let param = &cfg.setup.param;

    let mut out = Outputs::new(&a.range.out.out);
    for level in &outcome.levels {
        out.write(&format!("matrix_level{}.csv", level.level), |w| {
            io::write_matrix_table(w, &level.matrix, param)
        })?;
    }
    out.json("matrix.json", outcome.matrix())?;
    out.json("bracket.json", outcome.bracket())?;
    out.json("history.json", &outcome.history())?;
    for h in outcome.history() {
        say!(
            "level {} (step {}): {} in [{}, {}]",
            h.level, h.step, param, h.bracket.lo, h.bracket.hi
        );
    }
    let config = serde_json::to_value(&cfg)?;
    out.finish(name, config, started)
}

fn fss(a: &FssArgs, started: Instant, name: &str) -> Result<()> {
    let param = a.param.clone().unwrap_or_else(|| crate::args::default_param(a.model.model).to_string());
    let setup = setup(&a.model, &param, &a.window)?;
    let template = SweepConfig::new(setup, a.start, a.stop, a.step)?.with_refine_levels(a.refine)?;
    let result = finite_size_scaling(&template, &a.sizes)?;

    let mut out = Outputs::new(&a.out.out);
    out.write("fss.csv", |w| io::write_fss(w, &result))?;
    out.json("fss.json", &result)?;
    say!(
        "extrapolated {param}_c = {:.6} (slope {:.6}, residual {:.3e})",
        result.extrapolated, result.fit.slope, result.fit.residual
    );
    let config = json!({
        "template": template,
        "sizes": a.sizes,
    });
    out.finish(name, config, started)
}

fn excited(a: &RangeArgs, started: Instant, name: &str) -> Result<()> {
    let param = a.param();
    let setup = setup(&a.model, &param, &a.window)?;
    let grid = param_grid(a.start, a.stop, a.step)?;
    let records = excited_state_comparison(&setup, &grid)?;

    let mut out = Outputs::new(&a.out.out);
    out.write("excited.csv", |w| io::write_excited(w, &records, &param))?;
    out.json("excited.json", &records)?;
    for r in &records {
        say!("{param} = {}: {}", r.param, status_word(r.record.status()));
    }
    let config = json!({
        "setup": setup,
        "grid": grid,
    });
    out.finish(name, config, started)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "LOCC-possible (majorization holds)"
    } else {
        "not LOCC-possible (majorization fails)"
    }
}

fn locc(a: &LoccArgs, started: Instant, name: &str) -> Result<()> {
    let read = |p: &Path| io::read_spectrum_file(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())));
    let spec_a = read(&a.spec_a)?;
    let spec_b = read(&a.spec_b)?;
    let window = a.window.window()?;
    let alphas = window.grid()?;

    let a_to_b = majorizes(&spec_a, &spec_b);
    let b_to_a = majorizes(&spec_b, &spec_a);
    let dominance = renyi_dominance(&spec_a, &spec_b, &alphas)?;
    let crossing: CrossingRecord = CrossingRecord {
        pair: (0.0, 1.0),
        crossing: find_crossings(&spec_a, &spec_b, &window)?,
    };
    say!("A→B: {}", verdict(a_to_b));
    say!("B→A: {}", verdict(b_to_a));
    say!(
        "Rényi dominance: {}",
        match dominance {
            Dominance::FirstGeqEverywhere => "S_α(A) ≥ S_α(B) for all sampled α",
            Dominance::SecondGeqEverywhere => "S_α(B) ≥ S_α(A) for all sampled α",
            Dominance::Crossing => "curves cross; neither converts into the other",
            Dominance::Identical => "identical curves",
        }
    );

    let mut out = Outputs::new(&a.out.out);
    out.json(
        "locc.json",
        &json!({
            "a_to_b": a_to_b,
            "b_to_a": b_to_a,
            "dominance": dominance,
            "crossing": crossing.crossing,
        }),
    )?;
    let config = json!({
        "spec_a": a.spec_a,
        "spec_b": a.spec_b,
        "window": window_json(&window),
    });
    out.finish(name, config, started)
}

fn derivative(a: &DerivativeArgs, started: Instant, name: &str) -> Result<()> {
    let r = &a.range;
    let param = r.param();
    let setup = setup(&r.model, &param, &r.window)?;
    let grid = param_grid(r.start, r.stop, r.step)?;
    let table = derivative_curve(&setup, &grid, &a.alphas)?;

    let mut out = Outputs::new(&r.out.out);
    out.write("derivative.csv", |w| io::write_derivative(w, &table, &param))?;
    for (alpha, d) in table.alphas.iter().zip(&table.derivatives) {
        let (i, peak) = d
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &v)| if v.abs() > best.1.abs() { (i, v) } else { best });
        say!("alpha = {alpha}: largest |dS/d{param}| = {peak:.6} at {param} = {}", table.params[i]);
    }
    let config = json!({
        "setup": setup,
        "grid": grid,
        "alphas": a.alphas,
    });
    out.finish(name, config, started)
}
