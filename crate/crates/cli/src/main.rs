use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use wallcrystal::linear_forms::{self, closure, Operator};
use wallcrystal::wall_forms::{self, Horizon, IneqSet};
use wallcrystal::{walls, zcrystal};
use wallcrystal::{AdaptedSequence, AffineType, DominantWeight, LinearForm, WallOrPair, ZElement};

#[derive(Parser)]
#[command(name = "wallcrystal", version, about = "Wall inequalities for affine crystal bases")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inequality systems.
    #[command(subcommand)]
    Ineq(IneqCmd),
    /// Evaluate epsilon*_k on an element.
    Epsstar(EpsArgs),
    /// Enumerate or draw walls.
    #[command(subcommand)]
    Walls(WallsCmd),
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum IneqCmd {
    /// Wall inequalities for B(infinity).
    Binf(BinfArgs),
    /// Inequalities for B(lambda).
    Blam(BlamArgs),
}

#[derive(Subcommand)]
enum WallsCmd {
    /// List proper walls (or pairs) of the given wall type.
    Enum(WallEnumArgs),
    /// Draw a wall given as a literal.
    Render(RenderArgs),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Compare the S' closure of x_{s,k} with the wall forms.
    Closure(ClosureArgs),
    /// Compare Kashiwara generation with the inequality cut.
    Crystal(CrystalArgs),
    /// Check the block addition law on small walls.
    Props(PropsArgs),
    /// Check the positivity conditions.
    Positivity(PositivityArgs),
}

#[derive(Args, Clone)]
struct Setting {
    /// Affine family of g, e.g. D2 or A2odd.
    #[arg(long = "type")]
    ty: String,
    #[arg(long)]
    rank: usize,
    /// Comma separated permutation (i_1,...,i_n).
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BinfArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long)]
    k: Option<usize>,
    /// Shift s; all shifts up to the window when omitted.
    #[arg(long)]
    s: Option<i64>,
    /// Enumerate walls with at most this many atoms instead of searching
    /// the window.
    #[arg(long)]
    blocks: Option<u32>,
    /// Largest single index of supported forms (default 4 periods).
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    bare: bool,
}

#[derive(Args)]
struct BlamArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<i64>,
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    bare: bool,
}

#[derive(Args)]
struct EpsArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long)]
    k: usize,
    /// Element literal such as `a[1,3]=1;a[2,2]=4`.
    #[arg(long)]
    elem: String,
}

#[derive(Args)]
struct WallEnumArgs {
    /// Wall type family.
    #[arg(long = "type")]
    ty: String,
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    blocks: u32,
    /// Draw each wall as well.
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    wall: String,
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Args)]
struct ClosureArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long)]
    k: Option<usize>,
    /// Largest shift checked.
    #[arg(long, default_value_t = 2)]
    s: i64,
    /// Closure horizon in periods.
    #[arg(long, default_value_t = 6)]
    periods: i64,
}

#[derive(Args)]
struct CrystalArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Check B(lambda) instead of B(infinity).
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<i64>,
}

#[derive(Args)]
struct PropsArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long, default_value_t = 6)]
    blocks: u32,
    #[arg(long, default_value_t = 1)]
    s: i64,
}

#[derive(Args)]
struct PositivityArgs {
    #[command(flatten)]
    set: Setting,
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<i64>,
    /// Horizon in periods.
    #[arg(long, default_value_t = 4)]
    periods: i64,
}

#[derive(Serialize)]
struct JsonForm {
    constant: i64,
    terms: Vec<(i64, usize, i64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

#[derive(Serialize)]
struct JsonSet<'a> {
    #[serde(rename = "type")]
    ty: String,
    rank: usize,
    order: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<&'a [i64]>,
    forms: Vec<JsonForm>,
}

/// Whether a command's checks held.
enum Outcome {
    Ok,
    Failed,
}

impl Setting {
    fn sequence(&self) -> Result<AdaptedSequence> {
        let ty = AffineType::new(self.ty.parse()?, self.rank)?;
        if self.order.is_empty() {
            bail!("--order is required");
        }
        Ok(AdaptedSequence::from_permutation(ty, &self.order)?)
    }
}

fn check_k(seq: &AdaptedSequence, k: Option<usize>) -> Result<Vec<usize>> {
    match k {
        Some(k) => {
            seq.base_type().check_index(k)?;
            Ok(vec![k])
        }
        None => Ok((1..=seq.n()).collect()),
    }
}

fn weight(seq: &AdaptedSequence, values: &[i64]) -> Result<DominantWeight> {
    if values.is_empty() {
        return Ok(DominantWeight::zero(seq.n()));
    }
    if values.len() != seq.n() {
        bail!("--lambda needs {} values, got {}", seq.n(), values.len());
    }
    Ok(DominantWeight::new(values.to_vec())?)
}

fn emit(set: &Setting, k: Option<usize>, lambda: Option<&[i64]>, forms: &IneqSet, bare: bool) -> Result<()> {
    if !set.json {
        print!("{}", forms.to_text());
        return Ok(());
    }
    let doc = JsonSet {
        ty: set.ty.clone(),
        rank: set.rank,
        order: &set.order,
        k,
        lambda,
        forms: forms
            .sorted()
            .into_iter()
            .map(|(f, p)| JsonForm {
                constant: f.constant(),
                terms: f.terms().map(|(d, c)| (d.s, d.k, c)).collect(),
                provenance: (!bare).then(|| p.to_string()),
            })
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn default_window(seq: &AdaptedSequence, window: Option<i64>) -> i64 {
    window.unwrap_or(4 * seq.n() as i64)
}

fn binf(a: &BinfArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    let ks = check_k(&seq, a.k)?;
    if let Some(s) = a.s {
        if s < 1 {
            bail!("--s must be at least 1");
        }
    }
    let mut out = IneqSet::new();
    for &k in &ks {
        match a.blocks {
            Some(b) => {
                for w in walls::enumerate(seq.wall_type(), k, b)? {
                    let f = wall_forms::wall_form(&seq, 1, &w)?;
                    let lit = walls::to_literal(&w);
                    let shifts = match a.s {
                        Some(s) => s..=s,
                        None => 1..=1,
                    };
                    for s in shifts {
                        out.insert(f.shifted(s - 1), format!("L[s={s},k={k}] {lit}"));
                    }
                }
            }
            None => {
                let h = Horizon::new(&seq, default_window(&seq, a.window));
                let fam = match a.s {
                    Some(s) => wall_forms::comb_infinity_window(&seq, k, s, h)?,
                    None => wall_forms::comb_infinity_all_shifts(&seq, k, h)?,
                };
                out.extend(fam);
            }
        }
    }
    emit(&a.set, a.k, None, &out, a.bare)?;
    Ok(Outcome::Ok)
}

fn blam(a: &BlamArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    let ks = check_k(&seq, a.k)?;
    let lambda = weight(&seq, &a.lambda)?;
    let h = Horizon::new(&seq, default_window(&seq, a.window));
    let mut out = IneqSet::new();
    for &k in &ks {
        out.extend(wall_forms::comb_lambda(&seq, k, &lambda, h)?);
    }
    emit(&a.set, a.k, Some(lambda.values()), &out, a.bare)?;
    Ok(Outcome::Ok)
}

fn epsstar(a: &EpsArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    check_k(&seq, Some(a.k))?;
    let elem: ZElement = a.elem.parse().context("parsing --elem")?;
    for (d, _) in elem.entries() {
        seq.base_type().check_index(d.k)?;
        if d.s < 1 {
            bail!("element entry {d} has s < 1");
        }
    }
    let v = wall_forms::epsilon_star(&seq, a.k, &elem)?;
    if a.set.json {
        println!(
            "{}",
            serde_json::json!({ "k": a.k, "elem": elem.to_string(), "epsilon_star": v })
        );
    } else {
        println!("{v}");
    }
    Ok(Outcome::Ok)
}

fn walls_enum(a: &WallEnumArgs) -> Result<Outcome> {
    let ty = AffineType::new(a.ty.parse()?, a.rank)?;
    ty.check_index(a.k)?;
    let mut all: Vec<(String, WallOrPair)> = walls::enumerate(ty, a.k, a.blocks)?
        .into_iter()
        .map(|w| (walls::to_literal(&w), w))
        .collect();
    all.sort_by(|x, y| (x.1.atom_count(), &x.0).cmp(&(y.1.atom_count(), &y.0)));
    for (lit, w) in all {
        println!("{lit}");
        if a.render {
            println!("{}", walls::render(&w));
        }
    }
    Ok(Outcome::Ok)
}

fn walls_render(a: &RenderArgs) -> Result<Outcome> {
    let w = walls::parse_literal(&a.wall, a.rank)?;
    if !w.is_proper() {
        eprintln!("warning: wall is not proper");
    }
    print!("{}", walls::render(&w));
    Ok(Outcome::Ok)
}

fn verify_closure(a: &ClosureArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    let ks = check_k(&seq, a.k)?;
    if a.s < 1 || a.periods < 2 {
        bail!("need --s >= 1 and --periods >= 2");
    }
    let n = seq.n() as i64;
    let horizon = a.periods * n;
    let mut bad = Vec::new();
    let mut lines = Vec::new();
    for &k in &ks {
        for s in 1..=a.s {
            let cl = closure(&seq, &[LinearForm::x(s, k)], &Operator::SPrime, horizon)?;
            let walls = wall_forms::comb_infinity_window(&seq, k, s, Horizon::new(&seq, horizon - n))?.forms();
            let miss: Vec<String> = cl.certified.difference(&walls).map(|f| f.to_string()).collect();
            let extra: Vec<String> = walls.difference(&cl.certified).map(|f| f.to_string()).collect();
            lines.push(format!(
                "k={k} s={s} closure={} walls={} missing={} extra={}",
                cl.certified.len(),
                walls.len(),
                miss.len(),
                extra.len()
            ));
            for f in miss {
                bad.push(serde_json::json!({ "k": k, "s": s, "kind": "closure-only", "form": f }));
            }
            for f in extra {
                bad.push(serde_json::json!({ "k": k, "s": s, "kind": "wall-only", "form": f }));
            }
        }
    }
    report(&a.set, lines, bad)
}

fn verify_crystal(a: &CrystalArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    let lambda = if a.lambda.is_empty() {
        None
    } else {
        Some(weight(&seq, &a.lambda)?)
    };
    let rep = zcrystal::verify_equivalence(&seq, lambda.as_ref(), a.depth, None)?;
    let mut bad = Vec::new();
    for (e, f) in &rep.violations {
        bad.push(serde_json::json!({ "kind": "violates", "elem": e.to_string(), "form": f.to_string() }));
    }
    for e in &rep.unreached {
        bad.push(serde_json::json!({ "kind": "unreached", "elem": e.to_string() }));
    }
    for e in &rep.outside_box {
        bad.push(serde_json::json!({ "kind": "outside-box", "elem": e.to_string() }));
    }
    for r in &rep.missing_bounds {
        bad.push(serde_json::json!({ "kind": "missing-bound", "index": r }));
    }
    for e in zcrystal::generate(&seq, a.depth, lambda.as_ref()) {
        for v in zcrystal::crystal_axiom_violations(&seq, &e, lambda.as_ref()) {
            bad.push(serde_json::json!({ "kind": "axiom", "elem": e.to_string(), "detail": v }));
        }
    }
    let lines = vec![format!(
        "depth={} box={} generated={} lattice_points={} inequalities={}",
        rep.depth, rep.box_limit, rep.generated, rep.lattice_points, rep.inequalities
    )];
    report(&a.set, lines, bad)
}

fn verify_props(a: &PropsArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    if a.s < 1 {
        bail!("--s must be at least 1");
    }
    let (checked, fails) = wall_forms::addition_law_failures(&seq, a.s, a.blocks)?;
    let bad = fails
        .iter()
        .map(|f| {
            serde_json::json!({
                "wall": f.wall,
                "site": f.site.to_string(),
                "expected": f.expected.to_string(),
                "actual": f.actual.to_string(),
            })
        })
        .collect();
    report(&a.set, vec![format!("sites={checked} failures={}", fails.len())], bad)
}

fn verify_positivity(a: &PositivityArgs) -> Result<Outcome> {
    let seq = a.set.sequence()?;
    let lambda = weight(&seq, &a.lambda)?;
    let rep = linear_forms::positivity_report(&seq, &lambda, a.periods * seq.n() as i64)?;
    let lines = vec![format!(
        "xi_positive={} strict_positive={} ample={}",
        rep.xi_positive, rep.strict_positive, rep.ample
    )];
    let mut bad: Vec<serde_json::Value> = rep
        .violations
        .iter()
        .map(|v| serde_json::json!({ "detail": v }))
        .collect();
    if !rep.all_hold() && bad.is_empty() {
        bad.push(serde_json::json!({ "detail": "positivity condition failed" }));
    }
    report(&a.set, lines, bad)
}

fn report(set: &Setting, lines: Vec<String>, bad: Vec<serde_json::Value>) -> Result<Outcome> {
    let ok = bad.is_empty();
    if set.json {
        let doc = serde_json::json!({ "ok": ok, "summary": lines, "violations": bad });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        for l in &lines {
            println!("{l}");
        }
        for b in &bad {
            println!("violation {b}");
        }
        println!("{}", if ok { "ok" } else { "FAILED" });
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn run(cli: Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Ineq(IneqCmd::Binf(a)) => binf(a),
        Cmd::Ineq(IneqCmd::Blam(a)) => blam(a),
        Cmd::Epsstar(a) => epsstar(a),
        Cmd::Walls(WallsCmd::Enum(a)) => walls_enum(a),
        Cmd::Walls(WallsCmd::Render(a)) => walls_render(a),
        Cmd::Verify(VerifyCmd::Closure(a)) => verify_closure(a),
        Cmd::Verify(VerifyCmd::Crystal(a)) => verify_crystal(a),
        Cmd::Verify(VerifyCmd::Props(a)) => verify_props(a),
        Cmd::Verify(VerifyCmd::Positivity(a)) => verify_positivity(a),
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("WALLCRYSTAL_THREADS") {
        let n: usize = v.parse().with_context(|| format!("WALLCRYSTAL_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = init_threads().and_then(|_| run(cli));
    match res {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
