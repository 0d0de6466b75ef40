use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use rado_lab::coloring::{
    count_monochromatic_edges, find_proper_coloring, is_a_r_rado, min_monochromatic, monochromatic_count, Coloring,
    MinMode, RamseyVerdict, SearchBudget, Verdict,
};
use rado_lab::exact::rational_string;
use rado_lab::ground::format_element;
use rado_lab::hypergraph::{
    detect_structure, from_graph_copies, from_solutions, hat_p_hypergraph, m2_density, p_conditions_report,
    rado_minimal_reduce, OrderedHypergraph, SimpleGraph, StructureKind,
};
use rado_lab::matrix::{
    columns_condition, is_abundant, is_partition_regular, m_parameter, rank_mod_p, rank_rational, Ring,
};
use rado_lab::montecarlo::{ap_second_moment, estimate_rado_prob, threshold_fit, BisectionOptions, Estimate};
use rado_lab::primes::{ap_density_report, count_k_aps, count_k_aps_through, sieve_primes};
use rado_lab::solutions::{
    compatibility_report, count_solutions, extendability, irredundancy_witness, k_distinct_stats, key_bounds_check,
    list_solutions, projected_solutions, richness, threshold_table, ProjectedSolutionQuery,
};
use rado_lab::{Error, GroundSet, Result};

use crate::config::ExperimentConfig;

/// Column sets on the command line are 1-based, e.g. "1,3".
fn columns(s: &Option<String>, name: &str) -> Result<Option<Vec<usize>>> {
    let Some(s) = s else { return Ok(None) };
    let mut out = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let j: usize = t
            .parse()
            .map_err(|_| Error::Parse(format!("--{name}: `{t}` is not a column number")))?;
        if j == 0 {
            return Err(Error::Parse(format!("--{name}: columns are numbered from 1")));
        }
        out.push(j - 1);
    }
    Ok(Some(out))
}

fn required(cols: Option<Vec<usize>>, name: &str) -> Result<Vec<usize>> {
    cols.ok_or_else(|| Error::Invalid(format!("--{name} is required")))
}

fn one_based(w: &[usize]) -> String {
    let v: Vec<String> = w.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn one_based_vec(w: &[usize]) -> Vec<usize> {
    w.iter().map(|j| j + 1).collect()
}

/// Elements separated by ';', coordinates by ','; parentheses are optional.
fn elements_arg(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';')
        .map(|e| {
            e.trim()
                .trim_start_matches('(')
                .trim_end_matches(')')
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Parse(format!("--w0: bad coordinate `{c}`")))
                })
                .collect()
        })
        .collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// One command's result: JSON for archiving, text for the terminal, and a
/// CSV table when the result is tabular.
pub struct Output {
    pub result: Value,
    pub text: Vec<String>,
    pub table: Option<Table>,
    pub unknown: bool,
}

pub struct Table {
    pub header: String,
    pub rows: Vec<String>,
    /// Trailing `#` lines, e.g. fitted summaries.
    pub footer: Vec<String>,
}

impl Output {
    fn new(result: Value, text: Vec<String>) -> Self {
        Output {
            result,
            text,
            table: None,
            unknown: false,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    /// Also test the columns condition over Z_s; comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<u64>,
    /// Also report the rank over Z_p; comma-separated primes.
    #[arg(long, value_delimiter = ',')]
    pub prime: Vec<u64>,
}

pub fn analyze(cfg: &ExperimentConfig, args: &AnalyzeArgs) -> Result<Output> {
    let a = cfg.matrix()?;
    let mut text = vec![format!("matrix: {}x{}", a.rows(), a.cols())];
    let rank_q = rank_rational(&a);
    text.push(format!("rank over Q: {rank_q}"));
    let mut ranks_mod = Vec::new();
    for &p in &args.prime {
        let r = rank_mod_p(&a, p)?;
        text.push(format!("rank over Z{p}: {r}"));
        ranks_mod.push(json!({"p": p, "rank": r}));
    }
    let pr = is_partition_regular(&a);
    text.push(format!("partition regular: {}", yes(pr)));
    let mut conditions = Vec::new();
    let rings = std::iter::once(Ring::Rational).chain(args.s.iter().map(|&s| Ring::Modular(s)));
    for ring in rings {
        if let Ring::Modular(s) = ring {
            if s < 2 {
                return Err(Error::Invalid(format!("--s {s}: the modulus must be at least 2")));
            }
        }
        let cert = columns_condition(&a, ring);
        match &cert {
            Some(c) => {
                let parts: Vec<String> = c.parts.iter().map(|p| one_based(p)).collect();
                text.push(format!("columns condition over {ring}: yes, parts {}", parts.join(" ")));
            }
            None => text.push(format!("columns condition over {ring}: no")),
        }
        let verified = cert.as_ref().map(|c| c.verify(&a));
        conditions.push(json!({"ring": ring.to_string(), "holds": cert.is_some(), "certificate": cert, "verified": verified}));
    }

    let mut grounds = Vec::new();
    for (spec, g) in cfg.ground.iter().zip(cfg.grounds()?) {
        text.push(format!("[{spec}]"));
        let provider = g.rank_provider()?;
        let rank = provider.rank(&a)?;
        text.push(format!("  rank: {rank} ({:.6})", rank.to_f64()));
        let count = count_solutions(&a, &g)?;
        text.push(format!("  solutions: {count}"));
        let m = match m_parameter(&a, &provider) {
            Ok(m) => {
                let w: Vec<String> = m.witnesses.iter().map(|w| one_based(w)).collect();
                text.push(format!(
                    "  m-parameter: {} ({:.6}), witnesses {}, strictly balanced: {}",
                    m.value,
                    m.to_f64(),
                    w.join(" "),
                    yes(m.strictly_balanced)
                ));
                to_json(&m)
            }
            Err(e) => {
                text.push(format!("  m-parameter: undefined ({e})"));
                json!({"error": e.to_string()})
            }
        };
        let abundant = match is_abundant(&a, &provider) {
            Ok(b) => {
                text.push(format!("  abundant: {}", yes(b)));
                json!(b)
            }
            Err(e) => {
                text.push(format!("  abundant: undefined ({e})"));
                json!({"error": e.to_string()})
            }
        };
        let witness = irredundancy_witness(&a, &g)?;
        match &witness {
            Some(w) => {
                let els: Vec<String> = w.iter().map(|x| format_element(x)).collect();
                text.push(format!("  irredundant: yes, witness ({})", els.join(", ")));
            }
            None => text.push("  irredundant: no".into()),
        }
        let invariant = g.ambient_group().map(|grp| a.is_translation_invariant(&grp));
        if let Some(t) = invariant {
            text.push(format!("  translation invariant: {}", yes(t)));
        }
        let table = match threshold_table(&a, &g) {
            Ok(t) => {
                let maxi: Vec<String> = t.maximizers.iter().map(|w| one_based(w)).collect();
                text.push(format!("  p-hat: {} ({:.6}), attained at {}", t.p_hat, t.p_hat.to_f64(), maxi.join(" ")));
                to_json(&t)
            }
            Err(e) => {
                text.push(format!("  p-hat: undefined ({e})"));
                json!({"error": e.to_string()})
            }
        };
        grounds.push(json!({
            "ground": spec,
            "size": g.size()?.to_string(),
            "rank": rank,
            "solutions": count.to_string(),
            "m_parameter": m,
            "abundant": abundant,
            "irredundant": witness.is_some(),
            "irredundancy_witness": witness,
            "translation_invariant": invariant,
            "threshold_table": table,
        }));
    }
    let result = json!({
        "rows": a.rows(),
        "cols": a.cols(),
        "rank_rational": rank_q,
        "rank_mod_p": ranks_mod,
        "partition_regular": pr,
        "columns_conditions": conditions,
        "grounds": grounds,
    });
    Ok(Output::new(result, text))
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionsWhat {
    Count,
    Table,
    Richness,
    Extendability,
    KeyBounds,
    Compat,
    Project,
    KDistinct,
    List,
}

#[derive(Args, Debug, Serialize)]
pub struct SolutionsArgs {
    #[arg(value_enum, default_value = "count")]
    pub what: SolutionsWhat,
    /// Fixed columns for `project`, 1-based.
    #[arg(long)]
    pub w: Option<String>,
    /// Projected columns for `project` and `k-distinct`, 1-based.
    #[arg(long)]
    pub y: Option<String>,
    /// Values on the fixed columns, e.g. "3;5" or "(1,0);(2,1)".
    #[arg(long)]
    pub w0: Option<String>,
    /// The set X for `compat`, 1-based; chosen per member when absent.
    #[arg(long)]
    pub x: Option<String>,
    /// Fixed-value samples per subset for `key-bounds`.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Maximum number of tuples printed by `list` and `project`.
    #[arg(long, default_value_t = 1000)]
    pub limit: usize,
    /// Only solutions with pairwise distinct entries, for `count` and `list`.
    #[arg(long)]
    pub distinct: bool,
}

pub fn solutions(cfg: &ExperimentConfig, args: &SolutionsArgs) -> Result<Output> {
    let a = cfg.matrix()?;
    let grounds = cfg.grounds()?;
    if grounds.is_empty() {
        return Err(Error::Invalid("`solutions` needs --ground".into()));
    }
    let specs = &cfg.ground;
    match args.what {
        SolutionsWhat::Compat => {
            let x = columns(&args.x, "x")?;
            let report = compatibility_report(&a, &grounds, x.as_deref())?;
            let mut text = Vec::new();
            for row in &report.rows {
                text.push(format!(
                    "[{}] |S| = {}, X = {} (heuristic {}), p_X/p-hat = {}",
                    row.ground,
                    row.size,
                    one_based(&row.x),
                    one_based(&row.heuristic_x),
                    row.x_over_p_hat
                ));
                text.push(format!(
                    "  max product = {} ({}), max weak ratio = {} ({})",
                    row.max_entry,
                    row.max_entry.to_f64(),
                    row.max_weak,
                    row.max_weak.to_f64()
                ));
            }
            text.push(format!("trend of max product: {}", report.max_entry_trend));
            text.push(format!("trend of max weak ratio: {}", report.max_weak_trend));
            for (w, wp, t) in &report.entry_trends {
                text.push(format!("  W = {} W' = {}: {t}", one_based(w), one_based(wp)));
            }
            Ok(Output::new(to_json(&report), text))
        }
        SolutionsWhat::Table => {
            let mut rows = Vec::new();
            let mut text = Vec::new();
            let mut results = Vec::new();
            for (spec, g) in specs.iter().zip(&grounds) {
                let t = threshold_table(&a, g)?;
                text.push(format!("[{spec}] |S| = {}", t.size));
                for e in &t.entries {
                    let (exact, value) = match &e.p_w {
                        Some(p) => (p.to_string(), format!("{}", p.to_f64())),
                        None => ("inf".into(), "inf".into()),
                    };
                    text.push(format!("  W = {:<12} |Sol(W)| = {:<10} p_W = {exact} ({value})", one_based(&e.w), e.count));
                    rows.push(format!("{spec},\"{}\",{},{exact},{value}", one_based(&e.w), e.count));
                }
                let maxi: Vec<String> = t.maximizers.iter().map(|w| one_based(w)).collect();
                text.push(format!("  p-hat = {} ({}), attained at {}", t.p_hat, t.p_hat.to_f64(), maxi.join(" ")));
                for w in &t.warnings {
                    text.push(format!("  warning: {w}"));
                }
                results.push(json!({"ground": spec, "table": t}));
            }
            let mut out = Output::new(json!(results), text);
            out.table = Some(Table {
                header: "ground,w,count,p_w,p_w_value".into(),
                rows,
                footer: Vec::new(),
            });
            Ok(out)
        }
        _ => {
            let mut results = Vec::new();
            let mut text = Vec::new();
            for (spec, g) in specs.iter().zip(&grounds) {
                let (value, lines) = solutions_one(&a, g, args, cfg.seed)?;
                text.push(format!("[{spec}]"));
                text.extend(lines.into_iter().map(|l| format!("  {l}")));
                results.push(json!({"ground": spec, "result": value}));
            }
            Ok(Output::new(json!(results), text))
        }
    }
}

fn solutions_one(
    a: &rado_lab::IntegerMatrix,
    g: &GroundSet,
    args: &SolutionsArgs,
    seed: u64,
) -> Result<(Value, Vec<String>)> {
    Ok(match args.what {
        SolutionsWhat::Count => {
            let n = if args.distinct {
                rado_lab::solutions::count_in(a, &*g.elements()?, true)?
            } else {
                count_solutions(a, g)?
            };
            (json!({"count": n.to_string(), "distinct": args.distinct}), vec![format!("solutions: {n}")])
        }
        SolutionsWhat::Richness => {
            let r = richness(a, g)?;
            let eps = r.epsilon.as_ref().map_or("irrational".into(), rational_string);
            let line = format!("richness: epsilon = {eps} ({}), |Sol| = {}, rank = {}", r.epsilon_f64, r.count, r.rank);
            (to_json(&r), vec![line])
        }
        SolutionsWhat::Extendability => {
            let e = extendability(a, g)?;
            let at = match &e.witness {
                Some((w, y)) => format!(", at W = {} Y = {}", one_based(w), one_based(y)),
                None => " (whole group)".into(),
            };
            (to_json(&e), vec![format!("extendability: {}{at}", rational_string(&e.value))])
        }
        SolutionsWhat::KeyBounds => {
            let r = key_bounds_check(a, g, args.samples, seed)?;
            let line = format!(
                "key bounds: {} ({} subsets, {} fixed-value checks, {} equalities, {} violations)",
                if r.pass { "pass" } else { "FAIL" },
                r.subsets_checked,
                r.triples_checked,
                r.equality_cases,
                r.violations.len()
            );
            (to_json(&r), vec![line])
        }
        SolutionsWhat::Project => {
            let y = required(columns(&args.y, "y")?, "y")?;
            let w = columns(&args.w, "w")?.unwrap_or_default();
            let w0 = match &args.w0 {
                Some(s) => elements_arg(s)?,
                None => Vec::new(),
            };
            let q = ProjectedSolutionQuery::new(w, y, w0);
            let p = projected_solutions(a, g, &q, args.limit)?;
            let mut lines = vec![format!("projected solutions: {}", p.count)];
            if let Some(list) = &p.listing {
                for t in list {
                    let els: Vec<String> = t.iter().map(|x| format_element(x)).collect();
                    lines.push(format!("({})", els.join(", ")));
                }
            }
            (to_json(&p), lines)
        }
        SolutionsWhat::KDistinct => {
            let y = required(columns(&args.y, "y")?, "y")?;
            let s = k_distinct_stats(a, g, &y)?;
            let line = format!("distinct: {}, all: {}, ratio {}", s.distinct, s.total, rational_string(&s.ratio));
            (to_json(&s), vec![line])
        }
        SolutionsWhat::List => {
            let els = g.elements()?;
            let all = list_solutions(a, &els, args.distinct)?;
            let shown: Vec<Vec<String>> = all
                .iter()
                .take(args.limit)
                .map(|x| x.iter().map(|&i| els.format(i as usize)).collect())
                .collect();
            let mut lines = vec![format!("solutions: {} (showing {})", all.len(), shown.len())];
            lines.extend(shown.iter().map(|t| format!("({})", t.join(", "))));
            (json!({"count": all.len(), "solutions": shown}), lines)
        }
        SolutionsWhat::Table | SolutionsWhat::Compat => unreachable!("handled per family"),
    })
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimesWhat {
    Sieve,
    Count,
    Density,
    Through,
}

#[derive(Args, Debug, Serialize)]
pub struct PrimesArgs {
    #[arg(value_enum, default_value = "count")]
    pub what: PrimesWhat,
    /// Upper limits, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    /// Progression length.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Prime for `through`.
    #[arg(long)]
    pub q: Option<u64>,
    /// Position of `q` in the progression for `through`, 1-based.
    #[arg(long, default_value_t = 1)]
    pub position: usize,
    /// Save the sieve to this file (`sieve` only).
    #[arg(long)]
    pub save: Option<PathBuf>,
}

pub fn primes(_cfg: &ExperimentConfig, args: &PrimesArgs) -> Result<Output> {
    let mut results = Vec::new();
    let mut text = Vec::new();
    match args.what {
        PrimesWhat::Density => {
            let rows = ap_density_report(args.k, &args.n)?;
            let mut table = Table {
                header: "n,count,count_ratio,max_through,max_through_prime,max_through_position,through_ratio".into(),
                rows: Vec::new(),
                footer: Vec::new(),
            };
            for r in &rows {
                table.rows.push(format!(
                    "{},{},{},{},{},{},{}",
                    r.n, r.count, r.count_ratio, r.max_through, r.max_through_prime, r.max_through_position, r.through_ratio
                ));
            }
            let ratio = |f: fn(&rado_lab::primes::ApDensityRow) -> f64| {
                let v: Vec<f64> = rows.iter().map(f).collect();
                let hi = v.iter().cloned().fold(f64::MIN, f64::max);
                let lo = v.iter().cloned().fold(f64::MAX, f64::min);
                hi / lo
            };
            let (cr, tr) = (ratio(|r| r.count_ratio), ratio(|r| r.through_ratio));
            table.footer.push(format!("count_ratio spread {cr:.4}, through_ratio spread {tr:.4}"));
            text.push(table.header.clone());
            text.extend(table.rows.iter().cloned());
            text.push(format!("spread (max/min): count ratio {cr:.4}, through ratio {tr:.4}"));
            let mut out = Output::new(json!({"k": args.k, "rows": rows, "count_ratio_spread": cr, "through_ratio_spread": tr}), text);
            out.table = Some(table);
            return Ok(out);
        }
        PrimesWhat::Sieve => {
            if args.save.is_some() && args.n.len() != 1 {
                return Err(Error::Invalid("--save takes a single --n".into()));
            }
            for &n in &args.n {
                let t = sieve_primes(n)?;
                if let Some(path) = &args.save {
                    t.save(path)?;
                }
                text.push(format!("primes up to {n}: {}", t.count()));
                results.push(json!({"n": n, "count": t.count()}));
            }
        }
        PrimesWhat::Count => {
            for &n in &args.n {
                let c = count_k_aps(&sieve_primes(n)?, args.k)?;
                text.push(format!("{}-APs of primes up to {n}: {c}", args.k));
                results.push(json!({"n": n, "k": args.k, "count": c}));
            }
        }
        PrimesWhat::Through => {
            let q = args.q.ok_or_else(|| Error::Invalid("--q is required".into()))?;
            for &n in &args.n {
                let c = count_k_aps_through(&sieve_primes(n)?, q, args.position, args.k)?;
                text.push(format!("{}-APs up to {n} with term {} equal to {q}: {c}", args.k, args.position));
                results.push(json!({"n": n, "k": args.k, "q": q, "position": args.position, "count": c}));
            }
        }
    }
    Ok(Output::new(json!(results), text))
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperAction {
    Summary,
    Restrict,
    Delta,
    HatP,
    PReport,
    Detect,
    RadoMinimal,
    Write,
    M2,
}

#[derive(Args, Debug, Serialize)]
pub struct HyperArgs {
    #[arg(value_enum, default_value = "summary")]
    pub action: HyperAction,
    /// Read the hypergraph from a file ("k v e" then one edge per line).
    #[arg(long, conflicts_with = "graph")]
    pub file: Option<PathBuf>,
    /// Build copies of a graph in K_n: K3, C4, P3, joined by '+' for disjoint unions.
    #[arg(long)]
    pub graph: Option<String>,
    /// Values of n for --graph, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    /// The set X for `p-report`, 1-based.
    #[arg(long)]
    pub x: Option<String>,
    /// Structure to look for (default: all).
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long = "max-length", default_value_t = 6)]
    pub max_length: usize,
    /// Write the resulting hypergraph here.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

fn parse_graph(spec: &str) -> Result<SimpleGraph> {
    let mut out: Option<SimpleGraph> = None;
    for part in spec.split('+').map(str::trim) {
        let bad = || Error::Parse(format!("bad graph `{part}`; use K3, C4 or P3"));
        let (kind, n) = part.split_at(part.len().min(1));
        let n: usize = n.parse().map_err(|_| bad())?;
        let g = match kind {
            "K" => SimpleGraph::complete(n),
            "C" => SimpleGraph::cycle(n)?,
            "P" => SimpleGraph::path(n)?,
            _ => return Err(bad()),
        };
        out = Some(match out {
            Some(f) => f.union(&g),
            None => g,
        });
    }
    out.ok_or_else(|| Error::Parse("empty graph".into()))
}

fn hyper_family(cfg: &ExperimentConfig, args: &HyperArgs) -> Result<Vec<(String, OrderedHypergraph)>> {
    if let Some(path) = &args.file {
        let h = OrderedHypergraph::read_text(BufReader::new(fs::File::open(path)?))?;
        return Ok(vec![(path.display().to_string(), h)]);
    }
    if let Some(spec) = &args.graph {
        let f = parse_graph(spec)?;
        if args.n.is_empty() {
            return Err(Error::Invalid("--graph needs --n".into()));
        }
        return args
            .n
            .iter()
            .map(|&n| Ok((format!("{spec} in K{n}"), from_graph_copies(&f, n)?)))
            .collect();
    }
    let a = cfg.matrix()?;
    let grounds = cfg.grounds()?;
    if grounds.is_empty() {
        return Err(Error::Invalid("`hyper` needs --file, --graph, or --matrix with --ground".into()));
    }
    cfg.ground
        .iter()
        .zip(&grounds)
        .map(|(spec, g)| Ok((spec.clone(), from_solutions(&a, g)?)))
        .collect()
}

fn write_hypergraph(h: &OrderedHypergraph, path: &Option<PathBuf>, text: &mut Vec<String>) -> Result<()> {
    if let Some(p) = path {
        h.write_text(fs::File::create(p)?)?;
        text.push(format!("  written to {}", p.display()));
    }
    Ok(())
}

fn summary(h: &OrderedHypergraph) -> Value {
    json!({"k": h.uniformity(), "vertices": h.vertex_count(), "edges": h.edge_count()})
}

pub fn hyper(cfg: &ExperimentConfig, args: &HyperArgs) -> Result<Output> {
    let budget = SearchBudget { nodes: cfg.budget_nodes };
    if let HyperAction::M2 = args.action {
        let spec = args.graph.as_ref().ok_or_else(|| Error::Invalid("`m2` needs --graph".into()))?;
        let d = m2_density(&parse_graph(spec)?);
        let text = vec![format!("m2({spec}) = {} ({})", rational_string(&d), d.to_f64().unwrap_or(f64::NAN))];
        return Ok(Output::new(json!({"graph": spec, "m2": rational_string(&d)}), text));
    }
    let family = hyper_family(cfg, args)?;
    if let HyperAction::PReport = args.action {
        let x = columns(&args.x, "x")?;
        let hs: Vec<OrderedHypergraph> = family.iter().map(|f| f.1.clone()).collect();
        let report = p_conditions_report(&hs, x.as_deref())?;
        let opt = |p: &Option<rado_lab::PowerProduct>| p.as_ref().map_or(String::new(), |p| p.to_f64().to_string());
        let rat = |r: &Option<num_rational::BigRational>| r.as_ref().map_or(String::new(), rational_string);
        let mut table = Table {
            header: "member,vertices,edges,p_hat,p_hat_times_v,bounded_degree_max,one_degree_max,x,f_x_over_p_hat,two_degree_max,undefined".into(),
            rows: Vec::new(),
            footer: Vec::new(),
        };
        for ((label, _), r) in family.iter().zip(&report.rows) {
            table.rows.push(format!(
                "\"{label}\",{},{},{},{},{},{},\"{}\",{},{},\"{}\"",
                r.vertices,
                r.edges,
                opt(&r.p_hat),
                opt(&r.p_hat_times_v),
                rat(&r.bounded_degree_max),
                rat(&r.one_degree_max),
                r.x.as_ref().map_or(String::new(), |x| one_based(x)),
                opt(&r.f_x_over_p_hat),
                opt(&r.two_degree_max),
                r.undefined.join(" ")
            ));
        }
        let trends = format!(
            "trends: p_hat {}, p_hat*v {}, bounded degree {}, one degree {}, two degree {}",
            report.p_hat_trend,
            report.p_hat_times_v_trend,
            report.bounded_degree_trend,
            report.one_degree_trend,
            report.two_degree_trend
        );
        let mut text = vec![table.header.clone()];
        text.extend(table.rows.iter().cloned());
        text.push(trends.clone());
        table.footer.push(trends);
        let mut out = Output::new(to_json(&report), text);
        out.table = Some(table);
        return Ok(out);
    }

    let mut results = Vec::new();
    let mut text = Vec::new();
    let mut unknown = false;
    for (label, h) in &family {
        text.push(format!("[{label}] k = {}, v = {}, e = {}", h.uniformity(), h.vertex_count(), h.edge_count()));
        let value = match args.action {
            HyperAction::Summary => summary(h),
            HyperAction::Write => {
                match &args.write {
                    Some(_) => write_hypergraph(h, &args.write, &mut text)?,
                    None => {
                        let mut buf = Vec::new();
                        h.write_text(&mut buf)?;
                        text.push(String::from_utf8_lossy(&buf).trim_end().to_string());
                    }
                }
                summary(h)
            }
            HyperAction::Restrict => {
                let w = required(columns(&args.w, "w")?, "w")?;
                let r = h.restriction(&w)?;
                text.push(format!("  H_{}: v = {}, e = {}", one_based(&w), r.vertex_count(), r.edge_count()));
                write_hypergraph(&r, &args.write, &mut text)?;
                json!({"w": one_based_vec(&w), "restriction": summary(&r)})
            }
            HyperAction::Delta => {
                let w = required(columns(&args.w, "w")?, "w")?;
                let y = match columns(&args.y, "y")? {
                    Some(y) => y,
                    None => (0..h.uniformity()).collect(),
                };
                let d = h.delta(&w, &y)?;
                text.push(format!("  Delta_{}(H_{}) = {d}", one_based(&w), one_based(&y)));
                json!({"w": one_based_vec(&w), "y": one_based_vec(&y), "delta": d})
            }
            HyperAction::HatP => {
                let t = hat_p_hypergraph(h)?;
                for (w, e, f) in &t.entries {
                    let f = f.as_ref().map_or("inf".into(), |f| format!("{f} ({})", f.to_f64()));
                    text.push(format!("  W = {:<12} e(H_W) = {:<8} f_W = {f}", one_based(w), e));
                }
                let maxi: Vec<String> = t.maximizers.iter().map(|w| one_based(w)).collect();
                text.push(format!("  p-hat = {} ({}), attained at {}", t.p_hat, t.p_hat.to_f64(), maxi.join(" ")));
                to_json(&t)
            }
            HyperAction::Detect => {
                let kinds: Vec<StructureKind> = match args.kind.as_deref() {
                    None | Some("all") => StructureKind::ALL.to_vec(),
                    Some(k) => vec![k.parse()?],
                };
                let mut found = Vec::new();
                for kind in kinds {
                    let w = detect_structure(h, kind, args.max_length);
                    match &w {
                        Some(w) => text.push(format!("  {kind}: found, edges {:?}", w.edges)),
                        None => text.push(format!("  {kind}: none")),
                    }
                    found.push(json!({"kind": kind, "witness": w}));
                }
                json!(found)
            }
            HyperAction::RadoMinimal => match rado_minimal_reduce(h, budget) {
                Ok(m) => {
                    text.push(format!("  Rado-minimal subhypergraph: e = {}", m.edge_count()));
                    write_hypergraph(&m, &args.write, &mut text)?;
                    let edges: Vec<Vec<u32>> = m.edges().map(<[u32]>::to_vec).collect();
                    json!({"edges": edges, "ramsey": !m.is_empty()})
                }
                Err(Error::BudgetExceeded(n)) => {
                    unknown = true;
                    text.push(format!("  unknown: node budget {n} exceeded"));
                    json!({"verdict": "unknown"})
                }
                Err(e) => return Err(e),
            },
            HyperAction::PReport | HyperAction::M2 => unreachable!("handled above"),
        };
        results.push(json!({"member": label, "result": value}));
    }
    let mut out = Output::new(json!(results), text);
    out.unknown = unknown;
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("mode").args(["rado", "min_mono", "count_mono"])))]
pub struct ColorArgs {
    /// Decide whether every r-coloring has a monochromatic solution (default).
    #[arg(long)]
    pub rado: bool,
    /// Decide r-Ramsey for a hypergraph file instead of a matrix and ground set.
    #[arg(long)]
    pub hyper: Option<PathBuf>,
    /// Minimum number of monochromatic solutions over r-colorings.
    #[arg(long = "min-mono")]
    pub min_mono: bool,
    /// With --min-mono: best of this many random colorings instead of exhaustion.
    #[arg(long)]
    pub sampled: Option<usize>,
    /// Count monochromatic solutions under the coloring in this file.
    #[arg(long = "count-mono")]
    pub count_mono: Option<PathBuf>,
    /// Count all solutions, not only those with distinct entries.
    #[arg(long = "non-distinct")]
    pub non_distinct: bool,
    /// Write a proper coloring here when one is found.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

fn rado_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Ramsey => "rado",
        Verdict::NotRamsey => "not-rado",
        Verdict::Unknown => "unknown",
    }
}

fn verdict_json(v: &RamseyVerdict, hyper: bool) -> Value {
    let word = if hyper { v.verdict.to_string() } else { rado_word(v.verdict).to_string() };
    let colors: Option<Vec<u32>> = v.certificate.as_ref().map(|c| c.iter().map(|x| x + 1).collect());
    json!({"verdict": word, "certificate": colors, "nodes": v.nodes, "millis": v.millis as u64})
}

pub fn color(cfg: &ExperimentConfig, args: &ColorArgs) -> Result<Output> {
    let budget = SearchBudget { nodes: cfg.budget_nodes };
    let r = cfg.r;
    if let Some(path) = &args.hyper {
        let h = OrderedHypergraph::read_text(BufReader::new(fs::File::open(path)?))?;
        let v = find_proper_coloring(&h, r, budget);
        let mut text = vec![format!("{}-ramsey: {} ({} nodes)", r, v.verdict, v.nodes)];
        if let (Some(c), Some(out)) = (&v.certificate, &args.certificate) {
            let lines: Vec<String> = c.iter().enumerate().map(|(i, x)| format!("{} {}", h.label(i as u32), x + 1)).collect();
            fs::write(out, lines.join("\n") + "\n")?;
            text.push(format!("coloring written to {}", out.display()));
            let check = Coloring::new(r, c.clone())?;
            debug_assert_eq!(count_monochromatic_edges(&h, &check), 0);
        }
        let mut out = Output::new(verdict_json(&v, true), text);
        out.unknown = v.verdict == Verdict::Unknown;
        return Ok(out);
    }
    let a = cfg.matrix()?;
    let distinct = !args.non_distinct;
    if args.sampled.is_some() && !args.min_mono {
        return Err(Error::Invalid("--sampled goes with --min-mono".into()));
    }
    let mut results = Vec::new();
    let mut text = Vec::new();
    let mut unknown = false;
    let grounds = cfg.grounds()?;
    if grounds.is_empty() {
        return Err(Error::Invalid("`color` needs --ground or --hyper".into()));
    }
    if args.count_mono.is_some() && grounds.len() != 1 {
        return Err(Error::Invalid("--count-mono takes a single --ground".into()));
    }
    for (spec, g) in cfg.ground.iter().zip(&grounds) {
        let value = if let Some(path) = &args.count_mono {
            let els = g.elements()?;
            let c = Coloring::read_text(&els, r, BufReader::new(fs::File::open(path)?))?;
            let n = monochromatic_count(&a, g, &c, distinct)?;
            text.push(format!("[{spec}] monochromatic solutions: {n}"));
            json!({"ground": spec, "monochromatic": n.to_string(), "distinct": distinct})
        } else if args.min_mono {
            let mode = match args.sampled {
                Some(samples) => MinMode::Sampled { samples, seed: cfg.seed },
                None => MinMode::Exhaustive,
            };
            let m = min_monochromatic(&a, g, r, mode, distinct, budget)?;
            let kind = if m.exact { "minimum" } else { "upper bound" };
            text.push(format!("[{spec}] monochromatic solutions, {kind}: {}", m.count));
            json!({"ground": spec, "distinct": distinct, "min_mono": m})
        } else {
            let v = is_a_r_rado(&a, g, r, budget)?;
            unknown |= v.verdict == Verdict::Unknown;
            text.push(format!("[{spec}] verdict: {} ({} nodes, {} ms)", rado_word(v.verdict), v.nodes, v.millis));
            if let Some(c) = &v.certificate {
                let els = g.elements()?;
                let coloring = Coloring::new(r, c.clone())?;
                if let Some(out) = &args.certificate {
                    let path = if grounds.len() == 1 { out.clone() } else { suffixed(out, spec) };
                    coloring.write_text(&els, fs::File::create(&path)?)?;
                    text.push(format!("  coloring written to {}", path.display()));
                }
            }
            let mut j = verdict_json(&v, false);
            j["ground"] = json!(spec);
            j["r"] = json!(r);
            j
        };
        results.push(value);
    }
    let mut out = Output::new(json!(results), text);
    out.unknown = unknown;
    Ok(out)
}

fn suffixed(path: &std::path::Path, spec: &str) -> PathBuf {
    let tag: String = spec.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    let stem = path.file_stem().map_or("coloring".into(), |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{tag}"),
    };
    path.with_file_name(name)
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("mode").args(["estimate", "threshold_fit", "second_moment"])))]
pub struct McArgs {
    /// Estimate P(S_p is Rado) at each --p (default).
    #[arg(long)]
    pub estimate: bool,
    /// Locate p_half for each ground set by bisection and fit the log-log slope.
    #[arg(long = "threshold-fit")]
    pub threshold_fit: bool,
    /// Mean and overlap structure of k-APs in random subsets of the primes up to --n.
    #[arg(long = "second-moment")]
    pub second_moment: bool,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Bisection stops once hi/lo is at most this.
    #[arg(long, default_value_t = 1.2)]
    pub ratio: f64,
    #[arg(long = "max-evals", default_value_t = 40)]
    pub max_evals: usize,
}

pub fn mc(cfg: &ExperimentConfig, args: &McArgs) -> Result<Output> {
    let budget = SearchBudget { nodes: cfg.budget_nodes };
    if args.second_moment {
        let n = args.n.ok_or_else(|| Error::Invalid("--second-moment needs --n".into()))?;
        if cfg.p.is_empty() {
            return Err(Error::Invalid("--second-moment needs --p".into()));
        }
        let mut table = Table {
            header: "n,k,p,aps,expectation,pairs_one,pairs_two_plus,variance_bound,trials,simulated_mean,simulated_variance,standard_error,seed".into(),
            rows: Vec::new(),
            footer: Vec::new(),
        };
        let mut results = Vec::new();
        for &p in &cfg.p {
            let m = ap_second_moment(n, args.k, p, cfg.trials, cfg.seed)?;
            table.rows.push(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                m.n,
                m.k,
                m.p,
                m.aps,
                m.expectation,
                m.pairs_one,
                m.pairs_two_plus,
                m.variance_bound,
                m.trials,
                m.simulated_mean,
                m.simulated_variance,
                m.standard_error,
                m.seed
            ));
            results.push(m);
        }
        let mut text = vec![table.header.clone()];
        text.extend(table.rows.iter().cloned());
        let mut out = Output::new(to_json(&results), text);
        out.table = Some(table);
        return Ok(out);
    }

    let a = cfg.matrix()?;
    let grounds = cfg.grounds()?;
    if args.threshold_fit {
        let opts = BisectionOptions {
            ratio: args.ratio,
            max_evaluations: args.max_evals,
        };
        let fit = threshold_fit(&a, &grounds, cfg.r, cfg.trials, cfg.seed, budget, opts)?;
        let f = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
        let mut table = Table {
            header: "n,p_half,ci_lo,ci_hi,reference,evaluations,error".into(),
            rows: Vec::new(),
            footer: Vec::new(),
        };
        let mut unknown = false;
        for pt in &fit.points {
            unknown |= pt.evaluations.iter().any(|e| e.unknowns > 0);
            table.rows.push(format!(
                "{},{},{},{},{},{},{}",
                pt.size,
                f(pt.p_half),
                pt.ci.0,
                pt.ci.1,
                f(pt.reference),
                pt.evaluations.len(),
                pt.error.as_deref().unwrap_or("")
            ));
        }
        let summary = format!(
            "slope {} (se {}), reference {}",
            f(fit.slope),
            f(fit.slope_se),
            f(fit.reference_slope)
        );
        table.footer.push(summary.clone());
        let mut text = vec![table.header.clone()];
        text.extend(table.rows.iter().cloned());
        text.push(summary);
        let mut out = Output::new(to_json(&fit), text);
        out.table = Some(table);
        out.unknown = unknown;
        return Ok(out);
    }

    if grounds.is_empty() || cfg.p.is_empty() {
        return Err(Error::Invalid("`mc --estimate` needs --ground and --p".into()));
    }
    let mut estimates: Vec<Estimate> = Vec::new();
    for g in &grounds {
        for &p in &cfg.p {
            estimates.push(estimate_rado_prob(&a, g, cfg.r, p, cfg.trials, cfg.seed, budget)?);
        }
    }
    let table = Table {
        header: Estimate::CSV_HEADER.into(),
        rows: estimates.iter().map(Estimate::csv_row).collect(),
        footer: Vec::new(),
    };
    let mut text = vec![table.header.clone()];
    text.extend(table.rows.iter().cloned());
    let mut out = Output::new(to_json(&estimates), text);
    out.unknown = estimates.iter().any(|e| e.unknowns > 0);
    out.table = Some(table);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_lists_are_one_based() {
        assert_eq!(columns(&Some("1, 3".into()), "w").unwrap(), Some(vec![0, 2]));
        assert!(columns(&Some("0".into()), "w").is_err());
        assert!(columns(&Some("x".into()), "w").is_err());
        assert_eq!(columns(&None, "w").unwrap(), None);
    }

    #[test]
    fn element_lists() {
        assert_eq!(elements_arg("3;5").unwrap(), vec![vec![3], vec![5]]);
        assert_eq!(elements_arg("(1,0);(2, 1)").unwrap(), vec![vec![1, 0], vec![2, 1]]);
        assert!(elements_arg("1;a").is_err());
    }

    #[test]
    fn graph_specs() {
        let g = parse_graph("K3+K2").unwrap();
        assert_eq!((g.vertex_count(), g.edges().len()), (5, 4));
        assert_eq!(parse_graph("C4").unwrap().edges().len(), 4);
        assert!(parse_graph("X3").is_err());
        assert!(parse_graph("K").is_err());
    }

    #[test]
    fn certificate_names_per_ground() {
        let p = suffixed(std::path::Path::new("/tmp/c.txt"), "interval:8");
        assert_eq!(p, PathBuf::from("/tmp/c-interval_8.txt"));
    }
}
