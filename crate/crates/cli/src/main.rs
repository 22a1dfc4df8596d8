use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use destab_core::building::{self, FlagComplex};
use destab_core::cones::{is_classical_fan, ConeMorphism, Fan, RationalCone};
use destab_core::formalfan::{toric_degeneration_fan, DegenerationModel, FormalFan};
use destab_core::hn::{self, Piece, SubobjectLattice};
use destab_core::invariants::{self, NumericalInvariant, PLClass, PQClass};
use destab_core::kempf::{self, DestabResult, Status};
use destab_core::linalg::Mat;
use destab_core::rat::{self, Rat, RatJson};
use destab_core::stratify;
use destab_core::Error;

#[derive(Parser)]
#[command(name = "destab", version, about = "Exact instability calculus: fans, optimal destabilizers, HN filtrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Clone, Copy)]
struct Output {
    /// Emit JSON
    #[arg(long, global = true)]
    json: bool,
    /// Emit Graphviz DOT
    #[arg(long, global = true)]
    dot: bool,
    /// Emit CSV
    #[arg(long, global = true)]
    csv: bool,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest ambient dimension accepted
    #[arg(long, global = true, default_value_t = 8)]
    max_dim: usize,
    /// Largest lattice, field or complex accepted
    #[arg(long, global = true)]
    max_size: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Cone collections
    Fan {
        #[command(subcommand)]
        cmd: FanCmd,
    },
    /// Optimal destabilizers
    Kempf {
        #[command(subcommand)]
        cmd: KempfCmd,
    },
    /// Stratification of a torus model on affine space
    Stratify {
        /// Model JSON: {"weights", "excluded_supports", optional "l" and "b"}
        #[arg(long)]
        model: String,
        /// Linear functional, overriding the file
        #[arg(long)]
        l: Option<String>,
    },
    /// Harder–Narasimhan calculus
    Hn {
        #[command(subcommand)]
        cmd: HnCmd,
    },
    /// Spherical building of SL_n over F_q
    Building {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        /// Emit the OFF listing of maximal simplices
        #[arg(long)]
        off: bool,
    },
    /// Tautological coefficients and the normalized Futaki invariant
    Futaki {
        /// CSV rows n,dim,wsum,wsqsum
        #[arg(long)]
        samples: String,
        /// Dimension of the polarized variety
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
}

#[derive(Subcommand)]
enum FanCmd {
    /// Test whether a cone collection is a classical fan
    Check { file: String },
    /// Preimage fan under an integer projection
    Deg {
        /// Treat the input as the fan of a toric target
        #[arg(long)]
        toric: bool,
        file: String,
        /// Projection matrix rows, e.g. "1,0;0,1"; identity when omitted
        #[arg(long)]
        pi: Option<String>,
    },
}

#[derive(Subcommand)]
enum KempfCmd {
    /// Maximize μ = l/√b over a fan
    Solve {
        #[arg(long)]
        fan: String,
        /// Global linear functional, e.g. "1,2"
        #[arg(long)]
        l: String,
        /// "identity" or a JSON file holding a symmetric matrix
        #[arg(long, default_value = "identity")]
        b: String,
        /// Two integer vectors "u;v" spanning a cone on which to sample geodesic convexity
        #[arg(long)]
        gamma: Option<String>,
        /// Number of sampled segments for the convexity check
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum HnCmd {
    /// HN filtration of a lattice JSON file
    Run { file: String },
    /// Polygon of pieces given as "r,d;r,d" or a CSV file with r,d[,w] columns
    Polygon { input: String },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooLarge(_) | Error::DegreeOverflow { .. } | Error::Overflow => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type Run = Result<String, Failure>;

fn read(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{path}: {e}")))
}

fn parse_list(s: &str) -> Result<Vec<Rat>, Failure> {
    s.split(',').map(|x| rat::parse_rat(x.trim()).map_err(Failure::from)).collect()
}

fn parse_rows(s: &str) -> Result<Vec<Vec<Rat>>, Failure> {
    s.split(';').map(parse_list).collect()
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn check_dim(out: &Output, dim: usize) -> Result<(), Failure> {
    if dim > out.max_dim {
        return Err(fail(3, format!("dimension {dim} exceeds --max-dim {}", out.max_dim)));
    }
    Ok(())
}

#[derive(Deserialize)]
struct ConeList {
    dim: usize,
    cones: Vec<RationalCone>,
}

fn load_cones(path: &str, out: &Output) -> Result<ConeList, Failure> {
    let list: ConeList = serde_json::from_str(&read(path)?).map_err(|e| Failure::from(Error::from(e)))?;
    check_dim(out, list.dim)?;
    if let Some(c) = list.cones.iter().find(|c| c.dim() != list.dim) {
        return Err(Error::DimensionMismatch { expected: list.dim, got: c.dim() }.into());
    }
    Ok(list)
}

fn fan_check(file: &str, out: &Output) -> Run {
    let list = load_cones(file, out)?;
    let classical = is_classical_fan(&list.cones);
    if out.json {
        return Ok(json(&serde_json::json!({ "dim": list.dim, "cones": list.cones.len(), "classical": classical })));
    }
    Ok(format!("classical: {classical}\n"))
}

fn fan_deg(file: &str, pi: Option<&str>, out: &Output) -> Run {
    let list = load_cones(file, out)?;
    let pi: Vec<Vec<i64>> = match pi {
        Some(s) => int_rows(s)?,
        None => (0..list.dim).map(|i| (0..list.dim).map(|j| i64::from(i == j)).collect()).collect(),
    };
    let f = toric_degeneration_fan(&list.cones, &pi)?;
    check_dim(out, f.dim())?;
    if out.json {
        return Ok(json(&serde_json::json!({ "dim": f.dim(), "cones": f.pieces(), "classical": f.is_classical() })));
    }
    let mut s = format!("{} pieces in dimension {}, classical: {}\n", f.pieces().len(), f.dim(), f.is_classical());
    for p in f.pieces() {
        let gens: Vec<String> = p.generators().iter().map(ToString::to_string).collect();
        s.push_str(&format!("  cone {}\n", gens.join(" ")));
    }
    Ok(s)
}

fn load_b(spec: &str, fan: &Fan) -> Result<PQClass, Failure> {
    if spec == "identity" {
        return Ok(PQClass::identity(fan.clone())?);
    }
    let raw: Vec<Vec<RatJson>> = serde_json::from_str(&read(spec)?).map_err(|e| Failure::from(Error::from(e)))?;
    let m: Mat = raw.into_iter().map(rat::from_json_vec).collect();
    Ok(PQClass::global(fan.clone(), m)?)
}

fn render_destab(r: &DestabResult) -> String {
    match (&r.status, &r.value) {
        (Status::Unstable, Some(v)) => {
            let sq = v.signed_square().map_or_else(|| "+inf".to_string(), |x| rat::fmt_rat(&x));
            r.argmax_rays.iter().map(|ray| format!("ray {ray}, mu^2 = {sq}\n")).collect()
        }
        _ => "semistable (mu <= 0)\n".to_string(),
    }
}

fn int_rows(s: &str) -> Result<Vec<Vec<i64>>, Failure> {
    parse_rows(s)?
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    if x.is_integer() {
                        rat::to_i64(x.numer())
                    } else {
                        Err(Error::Invalid(format!("non-integer entry {x}")))
                    }
                })
                .collect::<Result<Vec<i64>, Error>>()
                .map_err(Failure::from)
        })
        .collect()
}

fn kempf_solve(fan: &str, l: &str, b: &str, gamma: Option<&str>, samples: usize, out: &Output) -> Run {
    let list = load_cones(fan, out)?;
    let f = Fan::new(list.dim, list.cones.clone())?;
    let inv = NumericalInvariant::new(PLClass::global(f.clone(), parse_list(l)?)?, load_b(b, &f)?)?;
    let r = kempf::maximize_on_fan(&inv, &FormalFan::new(list.dim, list.cones)?)?;
    let convex = match gamma {
        Some(g) => {
            let cols = int_rows(g)?;
            if cols.len() != 2 {
                return Err(fail(2, "--gamma takes exactly two vectors \"u;v\""));
            }
            let gm = ConeMorphism::from_columns_unchecked(&cols);
            Some(kempf::convexity_check(&inv, &gm, samples, out.seed)?)
        }
        None => None,
    };
    if out.json {
        let mut v = serde_json::to_value(&r).expect("serializable");
        if let Some(c) = &convex {
            v["convexity"] = serde_json::to_value(c).expect("serializable");
        }
        return Ok(json(&v));
    }
    let mut s = render_destab(&r);
    if let Some(c) = convex {
        s.push_str(&format!("convex along gamma: {c}\n"));
    }
    Ok(s)
}

#[derive(Deserialize)]
struct StratExtras {
    l: Option<Vec<RatJson>>,
    b: Option<Vec<Vec<RatJson>>>,
}

fn whole_space(k: usize) -> Result<Fan, Error> {
    let mut gens = Vec::new();
    for i in 0..k {
        for s in [1, -1] {
            let mut e = vec![0; k];
            e[i] = s;
            gens.push(e);
        }
    }
    Fan::new(k, vec![RationalCone::new(k, &gens)?])
}

fn stratify_cmd(model: &str, l: Option<&str>, out: &Output) -> Run {
    let text = read(model)?;
    let d: DegenerationModel = serde_json::from_str(&text).map_err(|e| Failure::from(Error::from(e)))?;
    let extras: StratExtras = serde_json::from_str(&text).map_err(|e| Failure::from(Error::from(e)))?;
    check_dim(out, d.k())?;
    if let Some(max) = out.max_size {
        if d.n() > max {
            return Err(fail(3, format!("{} coordinates exceed --max-size {max}", d.n())));
        }
    }
    let lin = match (l, extras.l) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(v)) => rat::from_json_vec(v),
        (None, None) => return Err(fail(2, "stratify needs a linear functional: \"l\" in the model file or --l")),
    };
    let fan = whole_space(d.k())?;
    let b = match extras.b {
        Some(m) => PQClass::global(fan.clone(), m.into_iter().map(rat::from_json_vec).collect())?,
        None => PQClass::identity(fan.clone())?,
    };
    let inv = NumericalInvariant::new(PLClass::global(fan, lin)?, b)?;
    let strat = stratify::build_stratification(&d, &inv)?;
    if out.dot {
        return Ok(stratify::export_hasse(&d, &strat));
    }
    let rep = stratify::report(&d, &strat);
    if out.json {
        return Ok(json(&rep));
    }
    let mut s = String::new();
    for st in &rep.strata {
        let members: Vec<String> = st.members.iter().map(ToString::to_string).collect();
        s.push_str(&format!("stratum mu = {} ray {} limit {}: {}\n", st.mu, st.ray, st.limit_support, members.join(" ")));
    }
    let ss: Vec<String> = rep.semistable.iter().map(ToString::to_string).collect();
    s.push_str(&format!("semistable: {}\n", ss.join(" ")));
    match &rep.witness {
        Some((a, b)) => s.push_str(&format!("closed: false, witness ({a}, {b})\n")),
        None => s.push_str("closed: true\n"),
    }
    s.push_str(&format!("uniqueness: {}\n", serde_json::to_value(rep.uniqueness).expect("serializable").as_str().unwrap_or("?")));
    Ok(s)
}

fn hn_run(file: &str, out: &Output) -> Run {
    let l = SubobjectLattice::from_json(&read(file)?)?;
    let v = hn::validate_lattice(&l);
    if !v.valid {
        if out.json {
            return Err(fail(2, json(&v)));
        }
        return Err(fail(2, format!("invalid lattice:\n  {}", v.violations.join("\n  "))));
    }
    let limit = out.max_size.unwrap_or(20);
    if l.len() > limit {
        return Err(fail(3, format!("{} elements exceed --max-size {limit}", l.len())));
    }
    let r = hn::hn_filtration(&l)?;
    let c = hn::check_containment(&l, &r);
    if out.json {
        return Ok(json(&serde_json::json!({ "hn": r, "containment": c })));
    }
    let pieces: Vec<String> = r.pieces.iter().map(|p| format!("({},{})", p.r, p.d)).collect();
    let weights: Vec<String> = r.weights.iter().map(rat::fmt_rat).collect();
    Ok(format!(
        "chain: {}\npieces: {}\nweights: {}\nmu: {}\nsemistable: {}\ncontainment: {}\n",
        r.chain.join(" < "),
        pieces.join(" "),
        weights.join(" "),
        r.mu,
        r.semistable,
        c.contained
    ))
}

fn load_pieces(input: &str) -> Result<Vec<Piece>, Failure> {
    if std::path::Path::new(input).is_file() {
        let text = read(input)?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with('r')) {
                continue;
            }
            let v = parse_list(line)?;
            if v.len() < 2 {
                return Err(fail(2, format!("{input}:{}: expected r,d[,w]", i + 1)));
            }
            out.push(Piece::new(v[0].clone(), v[1].clone()));
        }
        return Ok(out);
    }
    parse_rows(input)?
        .into_iter()
        .map(|v| match v.as_slice() {
            [r, d] => Ok(Piece::new(r.clone(), d.clone())),
            _ => Err(fail(2, format!("piece list {input:?}: expected \"r,d;r,d\""))),
        })
        .collect()
}

fn hn_polygon(input: &str, out: &Output) -> Run {
    let p = hn::pol(&load_pieces(input)?)?;
    if out.json {
        let pts: Vec<[String; 2]> = p.breakpoints().iter().map(|(x, y)| [rat::fmt_rat(x), rat::fmt_rat(y)]).collect();
        return Ok(json(&serde_json::json!({
            "breakpoints": pts,
            "integral_h_prime_sq": rat::fmt_rat(&p.integral_h_prime_sq()),
        })));
    }
    Ok(p.to_csv())
}

fn building_cmd(n: usize, q: u32, off: bool, out: &Output) -> Run {
    let max_points = out.max_size.map_or(building::MAX_FIELD_POINTS, |m| m as u64);
    let c: FlagComplex = building::building_complex_bounded(n, q, max_points, building::MAX_SIMPLICES)?;
    if off {
        return Ok(c.to_off());
    }
    if out.dot {
        return Ok(c.to_dot());
    }
    let st = building::building_stats(&c);
    if out.json {
        return Ok(json(&st));
    }
    let f: Vec<String> = st.f_vector.iter().map(ToString::to_string).collect();
    let colors: Vec<String> = st.color_classes.iter().map(ToString::to_string).collect();
    Ok(format!(
        "f-vector: {}\neuler characteristic: {}\ndimension: {}\npure: {}\nvertex classes: {}\nchambers: {} (formula {})\nthick: {}\n",
        f.join(", "),
        st.euler_characteristic,
        st.dimension,
        st.pure,
        colors.join(", "),
        st.chambers,
        st.chamber_formula,
        st.thick
    ))
}

fn futaki_cmd(samples: &str, r: usize, out: &Output) -> Run {
    let data = invariants::parse_futaki_csv(&read(samples)?)?;
    let c = invariants::futaki_fit(&data, r)?;
    let (l, b) = invariants::futaki_classes(&c);
    let norm = invariants::normalized_futaki_value(&c)?;
    let coeffs = [&c.a0, &c.a1, &c.d0, &c.d1, &c.q0, &c.q1].map(rat::fmt_rat);
    if out.json {
        return Ok(json(&serde_json::json!({
            "coefficients": { "a0": coeffs[0], "a1": coeffs[1], "d0": coeffs[2], "d1": coeffs[3], "q0": coeffs[4], "q1": coeffs[5] },
            "l": rat::fmt_rat(&l),
            "b": rat::fmt_rat(&b),
            "normalized": norm,
        })));
    }
    Ok(format!(
        "coefficients: {}\nl = {}, b = {}\nnormalized futaki: {} ({:.6})\n",
        coeffs.join(", "),
        rat::fmt_rat(&l),
        rat::fmt_rat(&b),
        norm,
        norm.float_view()
    ))
}

fn run(cli: Cli) -> Run {
    let out = cli.out;
    if [out.json, out.dot, out.csv].iter().filter(|&&x| x).count() > 1 {
        return Err(fail(2, "choose at most one of --json, --dot, --csv"));
    }
    let unsupported = |what: &str| Err(Failure::from(Error::UnsupportedFormat(what.to_string())));
    match cli.command {
        Command::Fan { cmd } => {
            if out.dot || out.csv {
                return unsupported("fan output is text or JSON");
            }
            match cmd {
                FanCmd::Check { file } => fan_check(&file, &out),
                FanCmd::Deg { toric, file, pi } => {
                    if !toric {
                        return Err(fail(2, "fan deg currently supports --toric inputs only"));
                    }
                    fan_deg(&file, pi.as_deref(), &out)
                }
            }
        }
        Command::Kempf { cmd: KempfCmd::Solve { fan, l, b, gamma, samples } } => {
            if out.dot || out.csv {
                return unsupported("kempf output is text or JSON");
            }
            kempf_solve(&fan, &l, &b, gamma.as_deref(), samples, &out)
        }
        Command::Stratify { model, l } => {
            if out.csv {
                return unsupported("stratify output is text, JSON or DOT");
            }
            stratify_cmd(&model, l.as_deref(), &out)
        }
        Command::Hn { cmd: HnCmd::Run { file } } => {
            if out.dot || out.csv {
                return unsupported("hn run output is text or JSON");
            }
            hn_run(&file, &out)
        }
        Command::Hn { cmd: HnCmd::Polygon { input } } => {
            if out.dot {
                return unsupported("polygon output is CSV or JSON");
            }
            hn_polygon(&input, &out)
        }
        Command::Building { n, q, off } => {
            if out.csv {
                return unsupported("building output is text, JSON, DOT or OFF");
            }
            building_cmd(n, q, off, &out)
        }
        Command::Futaki { samples, r } => {
            if out.dot || out.csv {
                return unsupported("futaki output is text or JSON");
            }
            futaki_cmd(&samples, r, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message.trim_end());
            ExitCode::from(f.code)
        }
    }
}
