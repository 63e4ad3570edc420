//! Subcommand bodies. Each prints either text or one JSON document.

use std::time::Instant;

use itertools::Itertools;
use serde_json::{json, Value};

use valid_orderings::format::{format_element, format_elements, parse_elements, parse_subset};
use valid_orderings::pipeline::{self, solve_batch, Solution, SolverParams, Status};
use valid_orderings::regularity::{regularize_f2n, regularize_general};
use valid_orderings::rng::{derive, rng};
use valid_orderings::spectral::{self as sp, SpectrumData};
use valid_orderings::sumsets::{self as ss};
use valid_orderings::{check_valid, Error, Group, Result, Subset};

use crate::{load_group, GroupArgs, Outcome, SubsetArgs};

/// Most subsets `exhaustive-verify` will enumerate.
const EXHAUSTIVE_CAP: usize = 1 << 22;

pub struct Out {
    pub json: bool,
    pub trace: bool,
}

impl Out {
    fn emit(&self, text: &str, value: Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
        } else {
            print!("{text}");
        }
    }
}

fn params_from(words: &[String]) -> Result<SolverParams> {
    let mut p = SolverParams::default();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| Error::Input(format!("expected key=value, got `{w}`")))?;
        p.set(k, v)?;
    }
    Ok(p)
}

fn load_subset(g: &Group, a: &SubsetArgs) -> Result<Subset> {
    match (&a.subset, &a.subset_file) {
        (Some(tokens), _) => parse_subset(g, &tokens.join(" ")),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))?;
            parse_subset(g, &text)
        }
        (None, None) => Err(Error::Input("give the subset with --subset or --subset-file".into())),
    }
}

fn group_json(g: &Group) -> Value {
    json!({ "kind": g.kind_name(), "order": g.order() })
}

fn solution_text(g: &Group, sol: &Solution, trace: bool) -> String {
    let mut out = format!("status {}\n", sol.status);
    match &sol.ordering {
        Some(ord) => out += &format!("{}\n", format_elements(g, ord)),
        None => out += &format!("{}\n", sol.trace.note.clone().unwrap_or_default()),
    }
    if trace {
        out += &sol.trace.render();
    }
    out
}

fn solution_json(g: &Group, sol: &Solution) -> Value {
    json!({
        "status": sol.status,
        "ordering": sol.ordering.as_ref().map(|o| o.iter().map(|&x| format_element(g, x)).collect::<Vec<_>>()),
        "reason": if sol.ordering.is_some() { None } else { sol.trace.note.clone() },
        "route": sol.trace.route,
        "trace": sol.trace,
    })
}

fn outcome_of(status: Status) -> Outcome {
    match status {
        Status::Ok => Outcome::Ok,
        Status::None => Outcome::Negative,
        Status::Fail => Outcome::Failed,
    }
}

pub fn solve(
    out: &Out,
    ga: &GroupArgs,
    words: &[String],
    sa: &SubsetArgs,
    batch: Option<&str>,
    allow_id: bool,
    parallel: bool,
) -> Result<Outcome> {
    let g = load_group(ga)?;
    let mut p = params_from(words)?;
    p.allow_id = allow_id;
    p.parallel = parallel;
    let Some(path) = batch else {
        let s = load_subset(&g, sa)?;
        let sol = pipeline::solve(&g, &s, &p)?;
        let mut v = solution_json(&g, &sol);
        v["group"] = group_json(&g);
        out.emit(&solution_text(&g, &sol, out.trace), v);
        return Ok(outcome_of(sol.status));
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))?;
    let instances = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_subset(&g, l))
        .collect::<Result<Vec<_>>>()?;
    let (sols, summary) = solve_batch(&g, &instances, &p)?;
    let mut txt = String::new();
    for sol in &sols {
        txt += &solution_text(&g, sol, out.trace);
    }
    txt += &format!("{}\n", summary.line());
    let v = json!({
        "group": group_json(&g),
        "solutions": sols.iter().map(|s| solution_json(&g, s)).collect::<Vec<_>>(),
        "summary": summary,
    });
    out.emit(&txt, v);
    Ok(if summary.failures.is_empty() { Outcome::Ok } else { Outcome::Failed })
}

pub fn check(out: &Out, ga: &GroupArgs, tokens: &[String]) -> Result<Outcome> {
    let g = load_group(ga)?;
    let ord = parse_elements(&g, tokens.iter().map(String::as_str))?;
    let repeat = (0..ord.len()).find_map(|j| (0..j).find(|&i| ord[i] == ord[j]).map(|i| (i + 1, j + 1)));
    let report = check_valid(&g, &ord);
    let (valid, text) = match (repeat, report.first_collision) {
        (Some((i, j)), _) => (false, format!("invalid: element repeated at positions {i} and {j}\n")),
        (None, Some((i, j))) => (false, format!("invalid: partial products {i} and {j} coincide\n")),
        (None, None) => (true, "valid\n".to_string()),
    };
    let v = json!({
        "valid": valid,
        "repeated": repeat,
        "first_collision": report.first_collision,
    });
    out.emit(&text, v);
    Ok(if valid { Outcome::Ok } else { Outcome::Negative })
}

pub fn spectrum_cmd(g: &Group, s: &Subset) -> Result<(String, Value)> {
    let spec = sp::spectrum(g, s)?;
    let mut text = String::new();
    let mut v = json!({ "group": group_json(g), "size": spec.size });
    match &spec.data {
        SpectrumData::Fourier(c) => {
            for (x, &val) in c.iter().enumerate() {
                text += &format!("coefficient {} {val}\n", format_element(g, x));
            }
            v["coefficients"] = json!(c);
        }
        SpectrumData::Eigen { values, symmetric } => {
            for z in values {
                text += &format!("eigenvalue {:.6} {:.6}\n", z.re, z.im);
            }
            for l in symmetric {
                text += &format!("symmetric {l:.6}\n");
            }
            v["eigenvalues"] = json!(values.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
            v["symmetric"] = json!(symmetric);
        }
    }
    let max = spec.max_nontrivial();
    let gap = sp::spectral_gap(&spec, s.len().max(1))?;
    text += &format!("max-nontrivial {}\ngap {gap:.6}\n", max.map_or("none".to_string(), |m| format!("{m:.6}")));
    v["max_nontrivial"] = json!(max);
    v["gap"] = json!(gap);
    Ok((text, v))
}

pub fn spectrum(out: &Out, ga: &GroupArgs, sa: &SubsetArgs) -> Result<Outcome> {
    let g = load_group(ga)?;
    let s = load_subset(&g, sa)?;
    let (text, v) = spectrum_cmd(&g, &s)?;
    out.emit(&text, v);
    Ok(Outcome::Ok)
}


pub fn regularize(out: &Out, ga: &GroupArgs, words: &[String], sa: &SubsetArgs) -> Result<Outcome> {
    let g = load_group(ga)?;
    let p = params_from(words)?;
    let s = load_subset(&g, sa)?;
    let reg = if g.cube_dim().is_some() { regularize_f2n(&g, &s, p.eps)? } else { regularize_general(&g, &s, p.eps)? };
    let mut text = format!("subgroup order {}\n", reg.h.order());
    let members: Vec<String> = match reg.h.basis() {
        Some(b) => {
            text += &format!("basis {}\n", format_elements(&g, b.vectors()));
            b.vectors().iter().map(|&x| format_element(&g, x)).collect()
        }
        None => {
            text += &format!("elements {}\n", format_elements(&g, &reg.h.elements()));
            reg.h.elements().iter().map(|&x| format_element(&g, x)).collect()
        }
    };
    let c = &reg.certificate;
    text += &format!("kept {}/{}\n", reg.s_in.len(), s.len());
    text += &format!(
        "certificate {} eta={:.6} certified={:.6} beta={:.6} tau={:.6}\n",
        serde_json::to_value(c.kind).expect("serializable").as_str().unwrap_or("?"),
        c.eta,
        c.certified,
        c.beta,
        c.tau
    );
    for inc in &reg.increments {
        text += &format!(
            // the character is in coordinates of the subgroup at that step
            "increment step={} character={} coefficient={} threshold={:.3} size {} -> {} dim {}\n",
            inc.step,
            inc.character,
            inc.coefficient,
            inc.threshold,
            inc.size_before,
            inc.size_after,
            inc.dim_after
        );
    }
    let v = json!({
        "group": group_json(&g),
        "subgroup_order": reg.h.order(),
        "generators": members,
        "kept": reg.s_in.len(),
        "size": s.len(),
        "certificate": c,
        "increments": reg.increments,
    });
    out.emit(&text, v);
    Ok(Outcome::Ok)
}

pub fn decompose(out: &Out, ga: &GroupArgs, words: &[String], sa: &SubsetArgs) -> Result<Outcome> {
    let g = load_group(ga)?;
    let p = params_from(words)?;
    let s = load_subset(&g, sa)?;
    let d = ss::decompose(&g, &s, p.gamma, p.k, p.alpha, p.seed)?;
    let mut text = String::new();
    let mut pieces = Vec::new();
    for pc in &d.pieces {
        let dim = pc.container.basis().map_or(0, |b| b.dim());
        text += &format!("piece size={} doubling={} container-dim={dim}\n", pc.elems.len(), pc.doubling);
        pieces.push(json!({
            "elements": pc.elems.iter().map(|x| format_element(&g, x)).collect::<Vec<_>>(),
            "doubling": pc.doubling,
            "container_dim": dim,
        }));
    }
    text += &format!("expander size={}\n", d.expander.len());
    let verdict = d.report.as_ref().map(|r| r.verdict.clone());
    if let Some(vd) = &verdict {
        text += &format!("verdict {}\n", serde_json::to_value(vd).expect("serializable")["verdict"].as_str().unwrap_or("?"));
    }
    text += &format!("junk size={}\n", d.junk.len());
    let v = json!({
        "group": group_json(&g),
        "pieces": pieces,
        "expander": d.expander.iter().map(|x| format_element(&g, x)).collect::<Vec<_>>(),
        "verdict": verdict,
        "junk": d.junk.iter().map(|x| format_element(&g, x)).collect::<Vec<_>>(),
    });
    out.emit(&text, v);
    Ok(Outcome::Ok)
}


pub fn cut_check(out: &Out, ga: &GroupArgs, sa: &SubsetArgs, eta: Option<f64>) -> Result<Outcome> {
    let g = load_group(ga)?;
    let s = load_subset(&g, sa)?;
    let eta = eta.unwrap_or(SolverParams::default().eta);
    let c = sp::certify_no_sparse_cut(&g, &s, eta)?;
    let mut text = format!(
        "certificate {} eta={eta:.6} certified={:.6} beta={:.6} tau={:.6}\n",
        serde_json::to_value(c.kind).expect("serializable").as_str().unwrap_or("?"),
        c.certified,
        c.beta,
        c.tau
    );
    if let Some(w) = &c.witness {
        text += &format!("witness x1={} edges={} density={:.6}\n", format_elements(&g, &w.x1), w.edges, w.density());
    }
    out.emit(&text, json!({ "group": group_json(&g), "certificate": c }));
    Ok(if c.holds() { Outcome::Ok } else { Outcome::Negative })
}

pub fn exhaustive(out: &Out, ga: &GroupArgs, words: &[String], max_size: Option<usize>, parallel: bool) -> Result<Outcome> {
    let g = load_group(ga)?;
    let mut p = params_from(words)?;
    p.parallel = parallel;
    let elems: Vec<usize> = (0..g.order()).filter(|&x| x != g.identity()).collect();
    let k = max_size.unwrap_or(elems.len()).min(elems.len());
    let mut count: usize = 0;
    let mut binom: usize = 1;
    for i in 1..=k {
        binom = binom * (elems.len() + 1 - i) / i;
        count = count.saturating_add(binom);
    }
    if count > EXHAUSTIVE_CAP {
        return Err(Error::Capacity { what: format!("{count} subsets"), limit: EXHAUSTIVE_CAP });
    }
    let instances: Vec<Subset> = (1..=k)
        .flat_map(|i| elems.iter().copied().combinations(i))
        .map(|c| Subset::from_indices(g.order(), c))
        .collect();
    let (_, summary) = solve_batch(&g, &instances, &p)?;
    let mut text = format!("{}\n", summary.line());
    for (route, n) in &summary.routes {
        text += &format!("route {route} {n}\n");
    }
    for w in &summary.nonexistence {
        text += &format!("no valid ordering: {}\n", format_elements(&g, w));
    }
    for w in &summary.failures {
        text += &format!("failed: {}\n", format_elements(&g, w));
    }
    let tokens = |ws: &[Vec<usize>]| ws.iter().map(|w| w.iter().map(|&x| format_element(&g, x)).collect::<Vec<_>>()).collect::<Vec<_>>();
    let v = json!({
        "group": group_json(&g),
        "max_size": k,
        "total": summary.total,
        "ordered": summary.ordered,
        "nonexistence": tokens(&summary.nonexistence),
        "failures": tokens(&summary.failures),
        "routes": summary.routes,
    });
    out.emit(&text, v);
    Ok(if summary.failures.is_empty() { Outcome::Ok } else { Outcome::Failed })
}

fn random_subset(n: usize, k: usize, seed: u64) -> Subset {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (1..n).collect();
    v.shuffle(&mut rng(seed));
    Subset::from_indices(n, v[..k.min(n - 1)].iter().copied())
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn bench(out: &Out, max_dim: usize) -> Result<Outcome> {
    let mut rows: Vec<(String, usize, f64)> = Vec::new();
    for n in (6..=max_dim.min(20)).step_by(2) {
        let mut f: Vec<f64> = (0..1usize << n).map(|i| (i % 7) as f64).collect();
        let t = Instant::now();
        sp::wht(&mut f)?;
        rows.push(("wht".into(), n, millis(t)));
        let a = random_subset(1 << n, (1 << n) / 8, derive(1, n as u64));
        let b = random_subset(1 << n, (1 << n) / 8, derive(2, n as u64));
        if n <= 12 {
            let g = Group::boolean_cube(n)?;
            let t = Instant::now();
            ss::sumset_naive(&g, &a, &b);
            rows.push(("sumset-naive".into(), n, millis(t)));
        }
        let t = Instant::now();
        ss::sumset_wht(&a, &b);
        rows.push(("sumset-wht".into(), n, millis(t)));
        if n <= 12 {
            let g = Group::boolean_cube(n)?;
            let s = random_subset(1 << n, (1 << n) / 5, derive(3, n as u64));
            let t = Instant::now();
            let sol = pipeline::solve(&g, &s, &SolverParams::default())?;
            rows.push((format!("solve-{}", sol.trace.route), n, millis(t)));
        }
    }
    let mut text = format!("{:<28} {:>4} {:>12}\n", "operation", "n", "ms");
    for (op, n, ms) in &rows {
        text += &format!("{op:<28} {n:>4} {ms:>12.3}\n");
    }
    let v = json!(rows.iter().map(|(op, n, ms)| json!({ "operation": op, "n": n, "ms": ms })).collect::<Vec<_>>());
    out.emit(&text, v);
    Ok(Outcome::Ok)
}
