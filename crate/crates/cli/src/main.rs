use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use qhyp_core::acceptance::{run_all, AcceptanceConfig};
use qhyp_core::classify::{gl2_classify, hyperbolic_type, in_d2, normal_form, real_trace, Gl2Class, HypTag, RealTrace};
use qhyp_core::conjugacy::{pairs_conjugate_gl2, pairs_conjugate_sp11, pairs_conjugate_sp21, quad_map_sp11};
use qhyp_core::fenchel::{build_surface, compatible_surface_spec, SurfaceSpec};
use qhyp_core::invariants::{angular_signed, pair_invariants};
use qhyp_core::qmat::is_member;
use qhyp_core::sample::{random_of_type, rng, TypeRequest};
use qhyp_core::{Group, QMatrix, QVec, Quaternion, Tolerances};

const SCHEMA: &str = "qhyp/1";

#[derive(Parser)]
#[command(name = "qhyp", version, about = "Quaternionic hyperbolic isometries: classification, conjugacy and surface assembly")]
struct Cli {
    #[arg(long, global = true, default_value = "sp21")]
    group: Group,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long = "tol.eps-sim", global = true)]
    sim: Option<f64>,
    #[arg(long = "tol.eps-pair", global = true)]
    pair: Option<f64>,
    #[arg(long = "tol.eps-grp", global = true)]
    grp: Option<f64>,
    #[arg(long = "tol.eps-cls", global = true)]
    cls: Option<f64>,
    #[arg(long = "tol.eps-typ", global = true)]
    typ: Option<f64>,
    #[arg(long = "tol.eps-proj", global = true)]
    proj: Option<f64>,
    #[arg(long = "tol.eps-conj", global = true)]
    conj: Option<f64>,
    #[arg(long = "tol.eps-nf", global = true)]
    nf: Option<f64>,
    #[arg(long = "tol.eps-platis", global = true)]
    platis: Option<f64>,
    #[arg(long = "tol.eps-rel", global = true)]
    rel: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            sim: self.sim.unwrap_or(d.sim),
            pair: self.pair.unwrap_or(d.pair),
            grp: self.grp.unwrap_or(d.grp),
            cls: self.cls.unwrap_or(d.cls),
            typ: self.typ.unwrap_or(d.typ),
            proj: self.proj.unwrap_or(d.proj),
            conj: self.conj.unwrap_or(d.conj),
            nf: self.nf.unwrap_or(d.nf),
            platis: self.platis.unwrap_or(d.platis),
            rel: self.rel.unwrap_or(d.rel),
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Random elements of a given hyperbolic type.
    Gen {
        /// loxodromic, one-real-eig, two-real-eig or strictly-hyperbolic
        #[arg(value_name = "TYPE")]
        kind: String,
        count: usize,
    },
    /// Membership, real trace, type and normal form of each matrix.
    Classify { input: PathBuf },
    /// Pair invariants of `{A, B}` objects.
    Invariants { input: PathBuf },
    /// Decide conjugacy of `{first: {A, B}, second: {A, B}}`.
    Conj { input: PathBuf },
    /// Sp(1,1) map between boundary quadruples `{z: [..4], w: [..4]}`.
    Quadmap { input: PathBuf },
    /// Assemble a surface group from a spec, or from a generated compatible spec.
    Surface {
        input: Option<PathBuf>,
        /// Genus of the generated spec when no input is given.
        #[arg(long, default_value_t = 2)]
        genus: usize,
    },
    /// Rejection-sample loxodromic Sp(2,1) real traces.
    SampleD2 {
        count: usize,
        /// Half-width of the sampling box.
        #[arg(long = "box", default_value_t = 10.0)]
        half: f64,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        large: usize,
        #[arg(long, default_value_t = 100)]
        small: usize,
        /// Flip the sign inside the angular invariant (mutation check).
        #[arg(long)]
        inject_angular_fault: bool,
    },
}

#[derive(Deserialize)]
struct Pair {
    #[serde(rename = "A")]
    a: QMatrix,
    #[serde(rename = "B")]
    b: QMatrix,
}

#[derive(Deserialize)]
struct ConjInput {
    first: Pair,
    second: Pair,
}

#[derive(Deserialize)]
struct QuadInput {
    z: [QVec; 4],
    w: [QVec; 4],
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A single item, an array of items, or an object holding them under `key`.
fn items<T: for<'de> Deserialize<'de>>(v: Value, key: &str) -> Result<Vec<T>> {
    let v = match v {
        Value::Object(mut m) if m.contains_key(key) => m.remove(key).unwrap_or(Value::Null),
        v => v,
    };
    if let Ok(one) = serde_json::from_value::<T>(v.clone()) {
        return Ok(vec![one]);
    }
    serde_json::from_value(v).map_err(|e| anyhow!("unexpected input shape: {e}"))
}

fn type_request(kind: &str, g: Group) -> Result<(TypeRequest, HypTag)> {
    let t: TypeRequest = kind.parse()?;
    let tag = match t {
        TypeRequest::Loxodromic => HypTag::Loxodromic,
        TypeRequest::OneRealEig => HypTag::OneRealEig,
        TypeRequest::TwoRealEig => HypTag::TwoRealEig,
        TypeRequest::StrictlyHyperbolic => HypTag::StrictlyHyperbolic,
    };
    let ok = match g {
        Group::Sp21 => true,
        Group::Sp11 => matches!(tag, HypTag::Loxodromic | HypTag::StrictlyHyperbolic),
        Group::Gl2h => tag == HypTag::Loxodromic,
    };
    if !ok {
        bail!("type {kind} is not available in {}", g.name());
    }
    Ok((t, tag))
}

fn has_type(m: &QMatrix, g: Group, tag: HypTag, tol: &Tolerances) -> bool {
    match g {
        Group::Gl2h => matches!(gl2_classify(m, tol), Ok(Gl2Class::ThreeSimple { .. })),
        _ => {
            is_member(m, g, tol).member
                && real_trace(m, g).map(|t| hyperbolic_type(&t, tol).tag == tag).unwrap_or(false)
        }
    }
}

fn gen(g: Group, kind: &str, count: usize, seed: u64, tol: &Tolerances) -> Result<Value> {
    let (t, tag) = type_request(kind, g)?;
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut misses = 0;
    while out.len() < count {
        let m = random_of_type(&mut r, g, t);
        if has_type(&m, g, tag, tol) {
            out.push(m);
        } else {
            misses += 1;
            if misses > 100 + 10 * count {
                bail!("could not produce {count} elements of type {kind}");
            }
        }
    }
    Ok(json!({ "group": g, "type": kind, "seed": seed, "matrices": out }))
}

fn classify_one(m: &QMatrix, g: Group, tol: &Tolerances) -> Value {
    if m.n() != g.dim() {
        return json!({ "error": format!("expected {0}x{0} for {1}", g.dim(), g.name()) });
    }
    if g == Group::Gl2h {
        return match gl2_classify(m, tol) {
            Ok(c) => json!({ "class": c }),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    let mem = is_member(m, g, tol);
    let mut v = json!({ "member": mem.member, "membership_residual": mem.residual });
    match real_trace(m, g) {
        Ok(t) => {
            let ty = hyperbolic_type(&t, tol);
            v["trace"] = json!(t);
            v["type"] = json!(ty);
            if ty.tag != HypTag::NotHyperbolic {
                v["normal_form"] = match normal_form(m, tol) {
                    Ok(nf) => json!(nf),
                    Err(e) => json!({ "error": e.to_string() }),
                };
            }
        }
        Err(e) => v["error"] = json!(e.to_string()),
    }
    v
}

fn conj(g: Group, input: ConjInput, tol: &Tolerances) -> Result<Value> {
    let (p, q) = (input.first, input.second);
    let decide = match g {
        Group::Sp21 => pairs_conjugate_sp21,
        Group::Sp11 => pairs_conjugate_sp11,
        Group::Gl2h => pairs_conjugate_gl2,
    };
    Ok(json!(decide(&p.a, &p.b, &q.a, &q.b, tol)?))
}

fn sample_d2(count: usize, half: f64, seed: u64, tol: &Tolerances) -> Value {
    let mut r = rng(seed);
    let (mut drawn, mut kept) = (0usize, Vec::with_capacity(count));
    // an empty box would never accept
    let cap = 1000 * count.max(1);
    while kept.len() < count && drawn < cap {
        drawn += 1;
        let abc = [r.gen_range(-half..half), r.gen_range(-half..half), r.gen_range(-half..half)];
        let t = RealTrace { group: Group::Sp21, coeffs: abc.to_vec(), det: None };
        if in_d2(&t, tol) {
            kept.push(abc);
        }
    }
    let rate = if drawn == 0 { 0.0 } else { kept.len() as f64 / drawn as f64 };
    json!({ "seed": seed, "box": half, "drawn": drawn, "accepted": kept.len(), "acceptance_rate": rate, "triples": kept })
}

fn flipped_angular(z1: &[Quaternion], z2: &[Quaternion], z3: &[Quaternion]) -> qhyp_core::Result<f64> {
    angular_signed(z1, z2, z3, 1.0)
}

fn emit(verb: &str, mut body: Value, out: Option<&Path>) -> Result<()> {
    if let Value::Object(m) = &mut body {
        let mut full = serde_json::Map::new();
        full.insert("schema".into(), json!(SCHEMA));
        full.insert("verb".into(), json!(verb));
        full.append(m);
        body = Value::Object(full);
    }
    let text = serde_json::to_string_pretty(&body)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let tol = cli.tol.resolve();
    let (g, seed, out) = (cli.group, cli.seed, cli.out.as_deref());
    log::debug!("tolerances {tol:?}");
    match cli.verb {
        Verb::Gen { kind, count } => emit("gen", gen(g, &kind, count, seed, &tol)?, out)?,
        Verb::Classify { input } => {
            let ms: Vec<QMatrix> = items(read_json(&input)?, "matrices")?;
            let results: Vec<Value> = ms.iter().map(|m| classify_one(m, g, &tol)).collect();
            emit("classify", json!({ "group": g, "results": results }), out)?;
        }
        Verb::Invariants { input } => {
            let ps: Vec<Pair> = items(read_json(&input)?, "pairs")?;
            let results: Vec<Value> = ps
                .iter()
                .map(|p| match pair_invariants(&p.a, &p.b, &tol) {
                    Ok(inv) => json!(inv),
                    Err(e) => json!({ "error": e.to_string() }),
                })
                .collect();
            emit("invariants", json!({ "results": results }), out)?;
        }
        Verb::Conj { input } => {
            let inputs: Vec<ConjInput> = items(read_json(&input)?, "pairs")?;
            let results = inputs.into_iter().map(|i| conj(g, i, &tol)).collect::<Result<Vec<_>>>()?;
            emit("conj", json!({ "group": g, "results": results }), out)?;
        }
        Verb::Quadmap { input } => {
            let q: QuadInput = serde_json::from_value(read_json(&input)?)?;
            let z = [&q.z[0][..], &q.z[1][..], &q.z[2][..], &q.z[3][..]];
            let w = [&q.w[0][..], &q.w[1][..], &q.w[2][..], &q.w[3][..]];
            emit("quadmap", json!(quad_map_sp11(z, w, &tol)), out)?;
        }
        Verb::Surface { input, genus } => {
            let spec: SurfaceSpec = match &input {
                Some(p) => serde_json::from_value(read_json(p)?)?,
                None => compatible_surface_spec(genus, &mut rng(seed), &tol)?,
            };
            let rep = build_surface(&spec, &tol)?;
            let mut body = json!({
                "generators": { "a": rep.a, "b": rep.b },
                "ledger": rep.ledger,
                "relator_residual": rep.relator_residual,
                "factor_residuals": rep.factor_residuals,
                "assembled": rep.assembled,
                "genus": rep.genus,
            });
            if input.is_none() {
                body["spec"] = json!(spec);
            }
            emit("surface", body, out)?;
        }
        Verb::SampleD2 { count, half } => emit("sample-d2", sample_d2(count, half, seed, &tol), out)?,
        Verb::Selftest { large, small, inject_angular_fault } => {
            let mut cfg = AcceptanceConfig { large, small, ..AcceptanceConfig::default() };
            if inject_angular_fault {
                cfg.angular = flipped_angular;
            }
            let reports = run_all(&cfg);
            for r in &reports {
                eprintln!("{}", r.line());
            }
            let passed = reports.iter().all(|r| r.passed);
            emit("selftest", json!({ "config": cfg, "passed": passed, "criteria": reports }), out)?;
            return Ok(passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
