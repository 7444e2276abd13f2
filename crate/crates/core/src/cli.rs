//! Command-line front end: argument types, dispatch and exit statuses.
//!
//! Exit status 0 = verdict produced, 2 = inconclusive (window exhausted),
//! 1 = error. Reports are written on 0 and 2.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::{self, apply_word, Word};
use crate::error::{Error, Result};
use crate::format;
use crate::generators::{
    gen_binary_hyperbolic, gen_cayley_free, gen_grid, gen_kary_tree, gen_sturmian, AddressSequence, Coloring,
    Orientation, QuadraticIrrational,
};
use crate::iso::{census, extraction_compare, lip_check, LipOutcome};
use crate::report::{self, name, names, Report, Verdict};
use crate::rigidity::{self, RigidLimitOptions, RigidityOptions, RigidityVerdict};
use crate::structure::{Elem, Structure};
use crate::symmetry::{self, IsoVerdict, SymmetryOptions, SymmetryVerdict};

#[derive(Debug, Parser)]
#[command(
    name = "lociso",
    version,
    about = "Local isomorphism, symmetry and rigidity of relational structure windows"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Where to write the report or structure (default: stdout).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a window of one of the example families.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Load and validate a structure file.
    Validate { file: PathBuf },
    /// Extract B(x, r) as a standalone window (frontier = outer sphere).
    Ball {
        file: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        radius: u32,
    },
    /// Census of pointed h-ball classes over the faithful elements.
    Census {
        file: PathBuf,
        #[arg(long)]
        h: u32,
    },
    /// Local isomorphism property at radius h.
    Lip {
        file: PathBuf,
        #[arg(long)]
        h: u32,
    },
    /// Extraction comparison of two windows, or isomorphism with a periodic one.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 1)]
        h: u32,
        /// Decide M ≅ N using the periods of N (closed N).
        #[arg(long)]
        periodic_iso: bool,
        #[arg(long, default_value_t = 8)]
        rank_bound: usize,
        #[arg(long)]
        at: Option<String>,
    },
    /// Equationality, strong commutativity and strong regularity.
    Algebra {
        /// The first file is checked alone; all files form the regularity family.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Apply a word such as `Succ:1>2,Succ:1>2` at `--at`.
        #[arg(long, requires = "at")]
        word: Option<String>,
        #[arg(long)]
        at: Option<String>,
    },
    /// Symmetry-approximants of displacement ≤ d surviving radius r.
    Symmetries {
        file: PathBuf,
        #[arg(long)]
        displacement: u32,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        at: Option<String>,
        /// Also accept the identity as a candidate.
        #[arg(long)]
        include_identity: bool,
        /// Require displacement ≤ d at every certified element.
        #[arg(long)]
        uniform: bool,
    },
    /// Periodicity rank and a period.
    Periods {
        file: PathBuf,
        #[arg(long)]
        rank_bound: usize,
        #[arg(long)]
        at: Option<String>,
    },
    /// Anchor form of the rigidity characterization.
    Rigidity {
        file: PathBuf,
        /// `a..b` (inclusive) or a comma list.
        #[arg(long)]
        radii: String,
        #[arg(long)]
        s: u32,
        /// Certify the local isomorphism property at this radius first.
        #[arg(long)]
        lip_h: Option<u32>,
        #[arg(long, default_value_t = 64)]
        max_anchors: usize,
    },
    /// Rigid-limit construction; step windows go to `--out-dir`.
    RigidLimit {
        file: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        anchor_pool: usize,
    },
    /// Quotient of a closed window by the group generated by permutations.
    Quotient {
        file: PathBuf,
        /// Permutation files: one `source target` name pair per line.
        #[arg(long = "perm", required = true)]
        perms: Vec<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        bound: usize,
        /// Where to write the quotient structure.
        #[arg(long)]
        structure_out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Cut-and-project colouring of ℤ by the line y = r·x + s.
    Sturmian {
        #[arg(long)]
        r: String,
        #[arg(long)]
        s: String,
        /// Half-width W: columns −W..W.
        #[arg(long)]
        width: u32,
        #[arg(long)]
        undirected: bool,
    },
    /// Functional k-ary tree of a given address.
    Tree {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        address: String,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        core: Option<u32>,
    },
    /// Cone patch of the binary hyperbolic tiling.
    Hyperbolic {
        #[arg(long)]
        address: String,
        #[arg(long)]
        levels: u32,
        #[arg(long)]
        half_width: u32,
    },
    /// ℤ^d box or torus.
    Grid(GridArgs),
    /// Ball in the Cayley structure of the free group.
    Cayley {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        radius: u32,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated sizes, e.g. `8,8`.
    #[arg(long)]
    sizes: String,
    #[arg(long)]
    torus: bool,
    /// `none`, `checkerboard` or `period:P` (d = 1).
    #[arg(long, default_value = "none")]
    coloring: String,
}

/// What a command produces.
pub enum Output {
    Report(Report),
    Structure(Structure),
}

fn parse_list(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::BadNumber(format!("list `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn load(path: &Path) -> Result<Structure> {
    format::load(path)
}

fn anchor(m: &Structure, at: &Option<String>) -> Result<Option<Elem>> {
    at.as_deref().map(|a| m.element(a)).transpose()
}

fn window_bounds(m: &Structure) -> Value {
    json!({ "elements": m.len(), "max_depth": m.max_depth().map(|d| if d == u32::MAX { Value::from("infinite") } else { Value::from(d) }) })
}

fn generate(cmd: &GenCommand) -> Result<Structure> {
    match cmd {
        GenCommand::Sturmian {
            r,
            s,
            width,
            undirected,
        } => {
            let r: QuadraticIrrational = r.parse()?;
            let s: QuadraticIrrational = s.parse()?;
            let o = if *undirected {
                Orientation::Undirected
            } else {
                Orientation::Directed
            };
            gen_sturmian(r, s, *width, o)
        }
        GenCommand::Tree {
            k,
            address,
            depth,
            core,
        } => gen_kary_tree(*k, &address.parse::<AddressSequence>()?, *depth, *core),
        GenCommand::Hyperbolic {
            address,
            levels,
            half_width,
        } => gen_binary_hyperbolic(&address.parse::<AddressSequence>()?, *levels, *half_width),
        GenCommand::Grid(g) => {
            let sizes: Vec<usize> = parse_list(&g.sizes)?.into_iter().map(|x| x as usize).collect();
            let coloring = match g.coloring.as_str() {
                "none" => Coloring::none(),
                "checkerboard" => Coloring::checkerboard(sizes.len()),
                p => match p.strip_prefix("period:").and_then(|n| n.parse().ok()) {
                    Some(n) if n > 0 => Coloring::period(n),
                    _ => return Err(Error::BadNumber(format!("colouring `{p}`"))),
                },
            };
            gen_grid(&sizes, g.torus, &coloring)
        }
        GenCommand::Cayley { k, radius } => gen_cayley_free(*k, *radius),
    }
}

fn read_permutation(m: &Structure, path: &Path) -> Result<Vec<Elem>> {
    let text = fs::read_to_string(path)?;
    let mut perm: Vec<Option<Elem>> = vec![None; m.len()];
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::NotAutomorphism(format!("bad permutation line `{line}`")));
        };
        perm[m.element(a)? as usize] = Some(m.element(b)?);
    }
    perm.into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::NotAutomorphism(format!("no image for `{}`", m.name(i as Elem)))))
        .collect()
}

/// Runs one command. `WindowExhausted` errors become inconclusive reports.
pub fn execute(cli: &Cli) -> Result<Output> {
    let exhausted = |command: &str, bounds: Value, e: Error| -> Result<Output> {
        match e {
            Error::WindowExhausted(_) | Error::NoFaithfulElements(_) | Error::UnfaithfulRadius { .. } => {
                Ok(Output::Report(Report::new(
                    command,
                    Verdict::Inconclusive,
                    bounds,
                    json!({ "reason": e.to_string() }),
                )))
            }
            e => Err(e),
        }
    };
    Ok(match &cli.command {
        Command::Gen(g) => Output::Structure(generate(g)?),
        Command::Validate { file } => {
            let m = load(file)?;
            let result = json!({
                "symbols": m.language().symbols().iter().map(|s| json!([s.name, s.arity])).collect::<Vec<_>>(),
                "tuples": m.tuple_count(),
                "closed": m.is_closed(),
                "connected": m.is_connected(),
                "local_finiteness_bound": m.local_finiteness_bound(),
            });
            Output::Report(Report::new(
                "validate",
                Verdict::HoldsUpToBounds,
                window_bounds(&m),
                result,
            ))
        }
        Command::Ball { file, at, radius } => {
            let m = load(file)?;
            Output::Structure(rigidity::ball_window(&m, m.element(at)?, *radius))
        }
        Command::Census { file, h } => {
            let m = load(file)?;
            let mut bounds = window_bounds(&m);
            bounds["h"] = json!(h);
            match census(&m, *h) {
                Ok(t) => {
                    let classes: Vec<Value> = t
                        .entries
                        .iter()
                        .map(|e| json!({ "digest": e.signature.digest(), "multiplicity": e.multiplicity, "representative": name(&m, e.representative) }))
                        .collect();
                    let result = json!({ "censused": t.censused(), "classes": classes });
                    Output::Report(Report::new("census", Verdict::HoldsUpToBounds, bounds, result))
                }
                Err(e) => return exhausted("census", bounds, e),
            }
        }
        Command::Lip { file, h } => {
            let m = load(file)?;
            let mut bounds = window_bounds(&m);
            bounds["h"] = json!(h);
            match lip_check(&m, *h) {
                Ok(rep) => {
                    bounds["max_testable_k"] = json!(rep.max_testable_k);
                    let (verdict, result) = match &rep.outcome {
                        LipOutcome::Holds { k, per_class } => (
                            Verdict::HoldsUpToBounds,
                            json!({ "classes": rep.classes, "k": k, "per_class": per_class.iter().map(|&(c, k)| json!([m.name(c), k])).collect::<Vec<_>>() }),
                        ),
                        LipOutcome::Fails { class, witness, k } => (
                            Verdict::FailsWithWitness,
                            json!({ "classes": rep.classes, "missing_class_representative": m.name(*class), "witness": m.name(*witness), "k": k }),
                        ),
                    };
                    Output::Report(Report::new("lip", verdict, bounds, result))
                }
                Err(e) => return exhausted("lip", bounds, e),
            }
        }
        Command::Compare {
            first,
            second,
            h,
            periodic_iso,
            rank_bound,
            at,
        } => {
            let m = load(first)?;
            let n = load(second)?;
            let bounds =
                json!({ "h": h, "first": window_bounds(&m), "second": window_bounds(&n), "rank_bound": rank_bound });
            if *periodic_iso {
                let period = match symmetry::detect_periodicity(&n, *rank_bound, None) {
                    Ok(p) => p,
                    Err(e) => return exhausted("compare", bounds, e),
                };
                let rep = match symmetry::periodic_isomorphism(&m, &n, &period, anchor(&m, at)?) {
                    Ok(r) => r,
                    Err(e) => return exhausted("compare", bounds, e),
                };
                let verdict = match rep.verdict {
                    IsoVerdict::Found => Verdict::HoldsUpToBounds,
                    IsoVerdict::Absent => Verdict::FailsWithWitness,
                    IsoVerdict::WindowExhausted => Verdict::Inconclusive,
                };
                let result = json!({
                    "isomorphism": rep.verdict,
                    "anchor": m.name(rep.anchor),
                    "map": rep.map.as_ref().map(|p| report::partial_iso(&m, &n, p)),
                    "census_witness": rep.census_witness,
                    "candidates": rep.candidates.len(),
                });
                Output::Report(Report::new("compare", verdict, bounds, result))
            } else {
                let rep = match extraction_compare(&m, &n, *h) {
                    Ok(r) => r,
                    Err(e) => return exhausted("compare", bounds, e),
                };
                let verdict = if rep.m_in_n && rep.n_in_m {
                    Verdict::HoldsUpToBounds
                } else {
                    Verdict::FailsWithWitness
                };
                let result = json!({
                    "first_in_second": rep.m_in_n,
                    "second_in_first": rep.n_in_m,
                    "missing_in_second": names(&m, &rep.missing_in_n),
                    "missing_in_first": names(&n, &rep.missing_in_m),
                    "classes_first": rep.classes_m,
                    "classes_second": rep.classes_n,
                    "multiplicities": rep.multiplicities.iter().map(|&(e, a, b)| json!([m.name(e), a, b])).collect::<Vec<_>>(),
                });
                Output::Report(Report::new("compare", verdict, bounds, result))
            }
        }
        Command::Algebra {
            files,
            max_len,
            word,
            at,
        } => {
            let family: Vec<Structure> = files.iter().map(|f| load(f)).collect::<Result<_>>()?;
            let m = &family[0];
            let bounds = json!({ "max_len": max_len, "window": window_bounds(m), "family_size": family.len() });
            let mut result = serde_json::Map::new();
            let mut fails = false;
            if let (Some(w), Some(at)) = (word, at) {
                let w = Word::parse(m.language(), w)?;
                let x = m.element(at)?;
                result.insert(
                    "word_image".into(),
                    json!(apply_word(m, x, &w)?.map(|y| m.name(y).to_string())),
                );
            }
            let eq = algebra::equational_check(m);
            fails |= !eq.holds();
            result.insert("equational".into(), json!(eq));
            if eq.holds() {
                let c = algebra::strong_commutativity_check(m, *max_len)?;
                fails |= c.witness.is_some();
                result.insert("strong_commutativity".into(), json!(c));
            }
            if family.iter().all(|s| algebra::equational_check(s).holds()) {
                let refs: Vec<&Structure> = family.iter().collect();
                let r = algebra::strong_regularity_check(&refs, *max_len)?;
                fails |= r.witness.is_some();
                result.insert("strong_regularity".into(), json!(r));
            }
            let verdict = if fails {
                Verdict::FailsWithWitness
            } else {
                Verdict::HoldsUpToBounds
            };
            Output::Report(Report::new("algebra", verdict, bounds, Value::Object(result)))
        }
        Command::Symmetries {
            file,
            displacement,
            radius,
            at,
            include_identity,
            uniform,
        } => {
            let m = load(file)?;
            let mut bounds = window_bounds(&m);
            bounds["displacement"] = json!(displacement);
            bounds["radius"] = json!(radius);
            let opts = SymmetryOptions {
                anchor: anchor(&m, at)?,
                exclude_identity: !include_identity,
                uniform: *uniform,
                ..Default::default()
            };
            let rep = match symmetry::find_symmetries(&m, *displacement, *radius, &opts) {
                Ok(r) => r,
                Err(e) => return exhausted("symmetries", bounds, e),
            };
            let verdict = match rep.verdict {
                SymmetryVerdict::Found => Verdict::HoldsUpToBounds,
                SymmetryVerdict::NoneFound => Verdict::FailsWithWitness,
                SymmetryVerdict::WindowExhausted => Verdict::Inconclusive,
            };
            let found: Vec<Value> = rep
                .found
                .iter()
                .map(|f| json!({ "target": m.name(f.target), "displacement": f.displacement, "complete": f.complete, "surviving_branches": f.surviving_branches, "map": report::partial_iso(&m, &m, &f.map) }))
                .collect();
            let candidates: Vec<Value> = rep
                .candidates
                .iter()
                .map(|c| json!({ "target": m.name(c.target), "distance": c.distance, "limit": c.limit, "status": c.status, "radius": c.radius, "branches": c.branches }))
                .collect();
            let result = json!({
                "anchor": m.name(rep.anchor),
                "symmetries": rep.verdict,
                "found": found,
                "candidates": candidates,
                "max_death_radius": rep.max_death_radius,
            });
            Output::Report(Report::new("symmetries", verdict, bounds, result))
        }
        Command::Periods { file, rank_bound, at } => {
            let m = load(file)?;
            let mut bounds = window_bounds(&m);
            bounds["rank_bound"] = json!(rank_bound);
            let rep = match symmetry::detect_periodicity(&m, *rank_bound, anchor(&m, at)?) {
                Ok(r) => r,
                Err(e) => return exhausted("periods", bounds, e),
            };
            bounds["certified_radius"] = json!(rep.certified_radius);
            let verdict = if rep.rank.is_some() {
                Verdict::HoldsUpToBounds
            } else {
                Verdict::Inconclusive
            };
            let result = json!({
                "anchor": m.name(rep.anchor),
                "rank": rep.rank,
                "class_counts": rep.class_counts,
                "period": names(&m, &rep.period),
                "weakly_connected": rep.weakly_connected,
                "disjoint_cover": rep.disjoint_cover,
                "generators": rep.generators.iter().map(|g| report::partial_iso(&m, &m, g)).collect::<Vec<_>>(),
            });
            Output::Report(Report::new("periods", verdict, bounds, result))
        }
        Command::Rigidity {
            file,
            radii,
            s,
            lip_h,
            max_anchors,
        } => {
            let m = load(file)?;
            let radii = parse_list(radii)?;
            let mut bounds = window_bounds(&m);
            bounds["radii"] = json!(radii);
            bounds["s"] = json!(s);
            let opts = RigidityOptions {
                max_anchors: *max_anchors,
                lip_radius: *lip_h,
            };
            let rep = match rigidity::rigidity_characterization(&m, &radii, *s, &opts) {
                Ok(r) => r,
                Err(e) => return exhausted("rigidity", bounds, e),
            };
            let verdict = match rep.verdict {
                RigidityVerdict::CharacterizationHoldsUpToBounds => Verdict::HoldsUpToBounds,
                RigidityVerdict::PropertyPDetected => Verdict::FailsWithWitness,
                RigidityVerdict::Inconclusive => Verdict::Inconclusive,
            };
            let per_radius: Vec<Value> = rep
                .per_radius
                .iter()
                .map(|(r, res)| match res {
                    rigidity::RadiusResult::Witness { anchor, s } => {
                        json!({ "r": r, "witness_anchor": m.name(*anchor), "s": s })
                    }
                    rigidity::RadiusResult::Violation { anchor, y, z, s } => {
                        json!({ "r": r, "anchor": m.name(*anchor), "pair": [m.name(*y), m.name(*z)], "s": s })
                    }
                    rigidity::RadiusResult::Inconclusive { reason } => json!({ "r": r, "inconclusive": reason }),
                })
                .collect();
            let result =
                json!({ "characterization": rep.verdict, "per_radius": per_radius, "lip_radius": rep.lip_radius });
            Output::Report(Report::new("rigidity", verdict, bounds, result))
        }
        Command::RigidLimit {
            file,
            steps,
            seed,
            out_dir,
            anchor_pool,
        } => {
            let m = load(file)?;
            let mut bounds = window_bounds(&m);
            bounds["steps"] = json!(steps);
            let opts = RigidLimitOptions {
                anchor_pool: *anchor_pool,
                ..Default::default()
            };
            let trace = match rigidity::rigid_limit(&m, *steps, m.element(seed)?, &opts) {
                Ok(t) => t,
                Err(Error::CharacterizationFails(reason)) => {
                    return Ok(Output::Report(Report::new(
                        "rigid-limit",
                        Verdict::FailsWithWitness,
                        bounds,
                        json!({ "characterization_fails": reason }),
                    )))
                }
                Err(e) => return exhausted("rigid-limit", bounds, e),
            };
            let checks = rigidity::verify_trace(&m, &trace)?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(dir)?;
                for (n, step) in trace.steps.iter().enumerate() {
                    format::save(&step.window, dir.join(format!("step{n}.struct")))?;
                }
            }
            let steps_json: Vec<Value> = trace
                .steps
                .iter()
                .enumerate()
                .map(|(n, st)| {
                    json!({
                        "n": n,
                        "anchor": m.name(st.anchor),
                        "r": st.r,
                        "s": st.s,
                        "recurrence_radius": st.recurrence_radius,
                        "separating_anchor": st.separating_anchor.map(|a| m.name(a).to_string()),
                        "window_elements": st.window.len(),
                        "theta": st.theta.as_ref().map(|t| report::partial_iso(&m, &m, t)),
                        "verified": checks.iter().find(|c| c.step == n).map(|c| c.passed()),
                    })
                })
                .collect();
            let all_pass = checks.iter().all(|c| c.passed());
            let verdict = if trace.truncated.is_some() || !all_pass {
                Verdict::Inconclusive
            } else {
                Verdict::HoldsUpToBounds
            };
            let result = json!({ "seed": m.name(trace.seed), "steps": steps_json, "truncated": trace.truncated, "checks": checks });
            Output::Report(Report::new("rigid-limit", verdict, bounds, result))
        }
        Command::Quotient {
            file,
            perms,
            bound,
            structure_out,
        } => {
            let m = load(file)?;
            let generators: Vec<Vec<Elem>> = perms.iter().map(|p| read_permutation(&m, p)).collect::<Result<_>>()?;
            let q = algebra::quotient(&m, &generators, *bound)?;
            if let Some(path) = structure_out {
                format::save(&q.structure, path)?;
            }
            let mut bounds = window_bounds(&m);
            bounds["group_bound"] = json!(bound);
            let surjection: Vec<Value> = m
                .elements()
                .map(|e| json!([m.name(e), q.structure.name(q.surjection[e as usize])]))
                .collect();
            let result = json!({
                "group_order": q.group_order,
                "quotient_elements": q.structure.len(),
                "quotient_tuples": q.structure.tuple_count(),
                "surjection": surjection,
            });
            Output::Report(Report::new("quotient", Verdict::HoldsUpToBounds, bounds, result))
        }
    })
}

/// Executes and writes the output; returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    if let Some(n) = cli.threads {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (text, code) = match execute(cli) {
        Ok(Output::Structure(m)) => (format::to_text(&m), 0),
        Ok(Output::Report(r)) => (r.to_json(), r.verdict.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    code
}
