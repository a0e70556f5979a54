mod cache;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gammaspin::verifier;
use gammaspin::{
    default_max_factors, torsion_bound_search, ChernMonomial, Family, GroupModel, ImageModule, TheorySpec, Val,
};
use serde_json::json;

use crate::cache::Cache;
use crate::report::Format;

#[derive(Parser)]
#[command(name = "gammaspin")]
#[command(about = "Images of Chern classes of Spin and SO torsors in Morava K-theory, computed exactly")]
#[command(version)]
struct Cli {
    /// Group family: spin | so
    #[arg(long, global = true, default_value = "spin")]
    family: Family,

    /// The group is Spin(m) or SO(m), with m odd
    #[arg(long, global = true)]
    m: Option<u32>,

    /// Morava height
    #[arg(long, global = true, default_value_t = 1)]
    n: u32,

    /// Largest number of factors in a spanning Chern monomial
    #[arg(long, global = true)]
    max_factors: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Lattice cache directory (default: $GAMMASPIN_CACHE_DIR, then ~/.cache/gammaspin)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Compute everything from scratch and store nothing
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Generators, relations and classes of the model
    Model,
    /// Images of Chern monomials in the ambient ring
    Image {
        /// Monomials such as c2, e8, c2c3c6 (default: every generator)
        classes: Vec<String>,
        /// Truncate the reported images at this I-adic precision
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Invariant factors of each graded piece
    Gr {
        /// Degree or inclusive range, e.g. 16 or 0..32
        #[arg(long)]
        degrees: Option<String>,
    },
    /// Coefficient ideals of the image lattices
    Profile,
    /// Smallest power of two killing y_top, with witnesses
    Torsion,
    /// Run registered facts
    Verify {
        /// A single fact id, e.g. T10.4
        #[arg(long, conflicts_with = "filter")]
        fact: Option<String>,
        /// Fact id or tag, e.g. spin13 or profile
        #[arg(long)]
        filter: Option<String>,
    },
    /// Precision at which unknown image tails no longer matter
    Saturate {
        /// Degree or inclusive range, e.g. 16 or 0..32
        #[arg(long)]
        degrees: Option<String>,
    },
    /// Whether one class vanishes in its graded piece
    Class {
        /// Monomial such as c2c3c6c7
        class: String,
        /// Decide using images truncated at this precision
        #[arg(long)]
        precision: Option<u32>,
    },
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Usage {
        Usage(e.to_string())
    }
}

struct Outcome {
    body: String,
    ok: bool,
}

impl Outcome {
    fn ok(body: String) -> Outcome {
        Outcome { body, ok: true }
    }
}

impl Cli {
    fn model(&self) -> Result<GroupModel, Usage> {
        let m = self.m.ok_or_else(|| Usage("this command needs --m".into()))?;
        Ok(GroupModel::build(self.family, m)?)
    }

    fn max_factors(&self, model: &GroupModel) -> Result<usize, Usage> {
        // No monomial of degree ≤ top has more factors than this.
        let most = model.top_degree() as usize / 4 + 1;
        match self.max_factors {
            None => Ok(default_max_factors(model)),
            Some(k) if (1..=most).contains(&k) => Ok(k),
            Some(k) => Err(Usage(format!("--max-factors {k} outside 1..={most} for {}", model.name()))),
        }
    }

    fn module(&self, model: &GroupModel) -> Result<ImageModule, Usage> {
        let theory = TheorySpec::new(self.n)?;
        let k = self.max_factors(model)?;
        if self.no_cache {
            return Ok(ImageModule::with_max_factors(model, theory, k));
        }
        match self.cache_dir.clone().or_else(cache::default_dir) {
            Some(dir) => Cache::new(dir).module(model, theory, k).map_err(|e| Usage(format!("cache: {e}"))),
            None => Ok(ImageModule::with_max_factors(model, theory, k)),
        }
    }

    fn require_text_or_json(&self) -> Result<(), Usage> {
        if self.format == Format::Csv {
            return Err(Usage("csv output is available for gr only".into()));
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome, Usage> {
        if !matches!(self.command, Commands::Gr { .. }) {
            self.require_text_or_json()?;
        }
        let format = self.format;
        match &self.command {
            Commands::Model => {
                let info = self.model()?.info();
                Ok(Outcome::ok(report::model(&info, format)))
            }
            Commands::Image { classes, precision } => {
                let g = self.model()?;
                let theory = TheorySpec::new(self.n)?;
                let cap = precision_cap(*precision)?;
                let monos: Vec<ChernMonomial> = if classes.is_empty() {
                    g.symbols().into_iter().map(|s| ChernMonomial::new(vec![s])).collect()
                } else {
                    classes.iter().map(|c| c.parse()).collect::<Result<_, _>>()?
                };
                let mut images = Vec::new();
                for x in monos {
                    let img = g.monomial_image(&x, theory)?.with_precision_cap(cap);
                    images.push((x, img));
                }
                Ok(Outcome::ok(report::images(&g, &images, format)))
            }
            Commands::Gr { degrees } => {
                let g = self.model()?;
                let range = degree_range(degrees.as_deref(), &g)?;
                let e = self.module(&g)?;
                let table: Vec<_> = e.gr_table().into_iter().filter(|c| range.contains(&c.degree)).collect();
                Ok(Outcome::ok(report::gr(&e, &table, format)))
            }
            Commands::Profile => {
                let g = self.model()?;
                let e = self.module(&g)?;
                Ok(Outcome::ok(report::profile(&e, format)))
            }
            Commands::Torsion => {
                let g = self.model()?;
                let t = torsion_bound_search(&g, TheorySpec::new(self.n)?, self.max_factors(&g)?);
                Ok(Outcome::ok(report::torsion(&g, self.n, &t, format)))
            }
            Commands::Verify { fact, filter } => match fact {
                Some(id) => {
                    let r = verifier::verify_fact(id)?;
                    let body = match format {
                        Format::Json => report::json(&r),
                        _ => report::facts_text(std::slice::from_ref(&r)),
                    };
                    Ok(Outcome { ok: r.ok(), body })
                }
                None => {
                    let s = verifier::run_suite(filter.as_deref());
                    if s.facts.is_empty() {
                        return Err(Usage(format!("no fact matches {:?}", filter.as_deref().unwrap_or(""))));
                    }
                    let body = match format {
                        Format::Json => report::json(&s),
                        _ => s.to_text(),
                    };
                    Ok(Outcome { ok: s.success(), body })
                }
            },
            Commands::Saturate { degrees } => {
                let g = self.model()?;
                let range = degree_range(degrees.as_deref(), &g)?;
                let e = self.module(&g)?;
                let s = e.saturation_threshold(*range.start(), *range.end());
                Ok(Outcome::ok(report::saturation(&e, &s, format)))
            }
            Commands::Class { class, precision } => {
                let g = self.model()?;
                let x: ChernMonomial = class.parse()?;
                let e = self.module(&g)?;
                let v = match precision {
                    Some(_) => e.class_in_gr_capped(&x, precision_cap(*precision)?)?,
                    None => e.class_in_gr(&x)?,
                };
                Ok(Outcome::ok(report::verdict(&e, &v, format)))
            }
        }
    }
}

fn precision_cap(p: Option<u32>) -> Result<Val, Usage> {
    match p {
        None => Ok(Val::Inf),
        Some(0) => Err(Usage("--precision must be at least 1".into())),
        Some(p) => Ok(Val::Fin(p)),
    }
}

/// `D` or `LO..HI`, inclusive. The upper end is clamped to the top degree.
fn degree_range(text: Option<&str>, g: &GroupModel) -> Result<std::ops::RangeInclusive<u32>, Usage> {
    let top = g.top_degree();
    let Some(text) = text else { return Ok(0..=top) };
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|_| Usage(format!("bad degree {s:?}")));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let d = parse(text)?;
            (d, d)
        }
    };
    if lo > hi {
        return Err(Usage(format!("empty degree range {text}")));
    }
    if lo > top {
        return Err(Usage(format!("degree {lo} is above the top degree {top} of {}", g.name())));
    }
    Ok(lo..=hi.min(top))
}

fn emit(cli: &Cli, body: &str) -> Result<(), Usage> {
    match &cli.output {
        Some(path) => fs::write(path, body).map_err(|e| Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.run().and_then(|out| emit(&cli, &out.body).map(|_| out.ok));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            if cli.format == Format::Json {
                eprintln!("{}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
    }
}
