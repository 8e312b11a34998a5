use serde::Serialize;
use serde_json::{json, Value};
use stargen::evolve::{probability_table, propagate_observable, propagate_stargen, EvolutionSpec};
use stargen::models::{self, ModelId, ModelKind};
use stargen::{AirySymbol, GaussSymbol, PhaseConfig, PhaseGrid, PolySymbol, C64};

use crate::args::{EvolveArgs, ExportArgs, Format, Indices, StargenArgs};
use crate::output::{coordinate_names, emit, grid_csv, grid_rows, num, to_json, GridMeta};
use crate::settings::{format_from_extension, merge_indices, ConfigFile, RunConfig};
use crate::CliError;

/// Indices after defaults, as written to JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Selection {
    Ho1d { n: u32, m: u32 },
    Ho2d { r: u32, sprime: i32, s: i32 },
    Linear { eprime: f64, e: f64 },
}

pub enum Symbol {
    Gauss(GaussSymbol),
    Airy(AirySymbol),
}

impl Symbol {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Gauss(_) => "gauss",
            Self::Airy(_) => "airy",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Gauss(g) => g.to_json(),
            Self::Airy(a) => a.to_json(),
        }
    }

    pub fn eval_grid(&self, grid: &PhaseGrid) -> Result<Vec<C64>, CliError> {
        match self {
            Self::Gauss(g) => Ok(grid.eval_gauss(g)?),
            Self::Airy(a) => {
                let vals = grid.eval(|z| a.eval(z).unwrap_or(C64::new(f64::NAN, 0.0)));
                if vals.iter().any(|v| !v.re.is_finite()) {
                    return Err(CliError::Check("non-finite Airy values on the grid".into()));
                }
                Ok(vals)
            }
        }
    }
}

pub fn default_grid(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Ho1d => "-4:4:0.1",
        ModelKind::Ho2d => "-3:3:0.3",
        ModelKind::Linear => "-4:4:0.2",
    }
}

fn reject(flag: &str, present: bool, kind: ModelKind) -> Result<(), CliError> {
    if present {
        return Err(CliError::Usage(format!("--{flag} does not apply to model {kind}")));
    }
    Ok(())
}

pub fn select(kind: ModelKind, ix: &Indices) -> Result<Selection, CliError> {
    let (oscillator1, oscillator2, linear) = (
        ix.n.is_some() || ix.m.is_some(),
        ix.r.is_some() || ix.s.is_some() || ix.sprime.is_some(),
        ix.e.is_some() || ix.eprime.is_some(),
    );
    Ok(match kind {
        ModelKind::Ho1d => {
            reject("r/--s/--sprime", oscillator2, kind)?;
            reject("e/--eprime", linear, kind)?;
            let n = ix.n.unwrap_or(0);
            Selection::Ho1d { n, m: ix.m.unwrap_or(n) }
        }
        ModelKind::Ho2d => {
            reject("n/--m", oscillator1, kind)?;
            reject("e/--eprime", linear, kind)?;
            let r = ix.r.unwrap_or(0);
            let s = ix.s.unwrap_or(-(r as i32));
            Selection::Ho2d { r, sprime: ix.sprime.unwrap_or(s), s }
        }
        ModelKind::Linear => {
            reject("n/--m", oscillator1, kind)?;
            reject("r/--s/--sprime", oscillator2, kind)?;
            let e = ix.e.unwrap_or(0.0);
            Selection::Linear { eprime: ix.eprime.unwrap_or(e), e }
        }
    })
}

pub fn build_symbol(cfg: PhaseConfig, sel: Selection) -> Result<Symbol, CliError> {
    Ok(match sel {
        Selection::Ho1d { n, m } => Symbol::Gauss(models::ho1d_wigner(cfg, n, m)?),
        Selection::Ho2d { r, sprime, s } => Symbol::Gauss(models::ho2d_wigner(cfg, r, sprime, s)?),
        Selection::Linear { eprime, e } => Symbol::Airy(models::linear_stargen(cfg, eprime, e)?),
    })
}

pub fn cmd_stargen(args: &StargenArgs) -> Result<bool, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let rc = RunConfig::resolve(&args.common, &file)?;
    let sel = select(rc.model.kind, &merge_indices(&args.indices, &file))?;
    let grid = rc.phase_grid(default_grid(rc.model.kind))?;
    let symbol = build_symbol(rc.model.config, sel)?;
    let values = symbol.eval_grid(&grid)?;
    let text = match rc.format_or(Format::Csv) {
        Format::Csv => grid_csv(&grid, &values),
        Format::Json => {
            let mut columns = coordinate_names(rc.model.config.dim_n);
            columns.extend(["re".to_string(), "im".to_string()]);
            to_json(&json!({
                "model": rc.model.kind,
                "config": rc.model.config,
                "indices": sel,
                "grid": GridMeta::of(&grid),
                "kind": symbol.kind(),
                "symbol": symbol.to_json(),
                "columns": columns,
                "rows": grid_rows(&grid, &values),
            }))
        }
    };
    emit(rc.output.as_deref(), &text)?;
    Ok(true)
}

pub fn observable(model: &ModelId, name: &str) -> Result<PolySymbol, CliError> {
    let cfg = model.config;
    let n = cfg.dim_n;
    let coord = |c: char, i: usize| if c == 'q' { PolySymbol::q(cfg, i) } else { PolySymbol::p(cfg, i) };
    match name {
        "h" | "H" => Ok(model.hamiltonian()),
        "l3" | "L3" if n == 2 => Ok(models::l3(cfg)),
        "q" | "p" if n == 1 => Ok(coord(name.chars().next().unwrap(), 0)),
        _ => {
            let mut chars = name.chars();
            if let (Some(c @ ('q' | 'p')), Ok(i)) = (chars.next(), chars.as_str().parse::<usize>()) {
                if (1..=n).contains(&i) {
                    return Ok(coord(c, i - 1));
                }
            }
            let valid = if n == 1 { "q, p, h" } else { "q1, q2, p1, p2, h, l3" };
            Err(CliError::Usage(format!("unknown observable {name:?} for model {} (expected {valid})", model.kind)))
        }
    }
}

/// Coefficient listing with one exponent column per coordinate.
fn coefficient_csv(sym: &PolySymbol) -> String {
    let n = sym.config.dim_n;
    let mut out = coordinate_names(n).join(",");
    out.push_str(",re,im\n");
    for (e, c) in sym.poly.terms() {
        let q_first: Vec<String> = e[n..].iter().chain(&e[..n]).map(u32::to_string).collect();
        out.push_str(&format!("{},{},{}\n", q_first.join(","), num(c.re), num(c.im)));
    }
    out
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<bool, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let rc = RunConfig::resolve(&args.common, &file)?;
    let name = args.observable.clone().or_else(|| file.observable.clone()).unwrap_or_else(|| "q".into());
    let t = args.t.or(file.t).unwrap_or(0.0);
    if !t.is_finite() {
        return Err(CliError::Usage(format!("time must be finite, got {t}")));
    }
    let model = rc.model;
    let obs = observable(&model, &name)?;
    let spec = EvolutionSpec::from_symbol(&model.hamiltonian(), t)?;
    let moved = propagate_observable(&obs, &spec)?;
    let text = match rc.format_or(Format::Json) {
        Format::Csv => coefficient_csv(&moved),
        Format::Json => to_json(&json!({
            "model": model.kind,
            "config": model.config,
            "observable": name,
            "t": t,
            "symbol": moved.to_json(),
        })),
    };
    emit(rc.output.as_deref(), &text)?;

    if let Some(path) = args.table.clone().or_else(|| file.table.clone()) {
        if !matches!(name.as_str(), "h" | "H") || model.kind == ModelKind::Linear {
            return Err(CliError::Usage("probability tables need --observable h on an oscillator model".into()));
        }
        let sel = select(model.kind, &merge_indices(&args.indices, &file))?;
        let fw = match sel {
            Selection::Ho1d { n, m } if n == m => models::ho1d_wigner(model.config, n, n)?,
            Selection::Ho2d { r, sprime, s } if sprime == s => models::ho2d_wigner(model.config, r, s, s)?,
            _ => return Err(CliError::Usage("the state for a probability table must be diagonal".into())),
        };
        let n_max = args.max_n.or(file.max_n).unwrap_or(8);
        let measure = models::energy_measure(&model, n_max)?;
        let (rows, tail) = probability_table(&fw, &propagate_stargen(&measure, &spec))?;
        let text = match format_from_extension(Some(&path)).unwrap_or(Format::Json) {
            Format::Csv => {
                let mut s = String::from("eigenvalue,probability\n");
                for (a, p) in &rows {
                    s.push_str(&format!("{},{}\n", num(*a), num(*p)));
                }
                s
            }
            Format::Json => to_json(&json!({
                "state": sel,
                "t": t,
                "rows": rows.iter().map(|(a, p)| json!({"eigenvalue": a, "probability": p})).collect::<Vec<_>>(),
                "tail": tail,
            })),
        };
        emit(Some(&path), &text)?;
    }
    Ok(true)
}

pub fn cmd_export(args: &ExportArgs) -> Result<bool, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let rc = RunConfig::resolve(&args.common, &file)?;
    if rc.format_or(Format::Json) != Format::Json {
        return Err(CliError::Usage("export writes JSON only".into()));
    }
    let model = rc.model;
    let what = args.what.clone().or_else(|| file.what.clone()).unwrap_or_else(|| "symbol".into());
    let n_max = args.max_n.or(file.max_n).unwrap_or(8);
    let body = match what.as_str() {
        "symbol" => {
            let sel = select(model.kind, &merge_indices(&args.indices, &file))?;
            let sym = build_symbol(model.config, sel)?;
            json!({"indices": sel, "kind": sym.kind(), "symbol": sym.to_json()})
        }
        "hamiltonian" => json!({"symbol": model.hamiltonian().to_json()}),
        "measure" => json!({"measure": models::energy_measure(&model, n_max)?.to_json()}),
        "spectrum" => {
            json!({"spectrum": models::model_spectrum(&model, n_max).map_err(|e| CliError::Usage(e.to_string()))?})
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown export {other:?} (expected symbol, hamiltonian, measure or spectrum)"
            )))
        }
    };
    let mut doc = json!({"model": model.kind, "config": model.config, "what": what});
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    emit(rc.output.as_deref(), &to_json(&doc))?;
    Ok(true)
}
