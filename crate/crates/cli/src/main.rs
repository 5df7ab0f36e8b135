use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sprouts_core::checker::{check_compute, verify_solution, DotLabels, SolutionTree};
use sprouts_core::explore::{serve, Session};
use sprouts_core::{canon, canonical_form, children, simplify, Engine, Goal, Position, Store};

#[derive(Parser)]
#[command(
    name = "sprouts",
    version,
    about = "Sprouts positions, outcomes and nimbers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Solver {
    /// Result table file; loaded if present, new records are appended.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Give up after this many couples.
    #[arg(long)]
    budget: Option<u64>,
}

impl Solver {
    fn store(&self) -> Result<Arc<Store>> {
        Ok(Arc::new(match &self.db {
            Some(p) => Store::open(p).with_context(|| format!("opening {}", p.display()))?,
            None => Store::new(),
        }))
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Root {
    /// Start from the game with this many spots.
    #[arg(long)]
    spots: Option<usize>,
    /// Start from this position string.
    #[arg(long)]
    position: Option<String>,
}

impl Root {
    fn position(&self) -> Result<Position> {
        match (&self.spots, &self.position) {
            (Some(p), _) => Ok(Position::start(*p)),
            (_, Some(s)) => parse(s),
            _ => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Outcome and nimber of the p-spot game.
    Solve {
        #[arg(long)]
        spots: usize,
        #[command(flatten)]
        solver: Solver,
        /// Only decide the outcome.
        #[arg(long)]
        outcome_only: bool,
        /// Serve the live search on this local port.
        #[arg(long)]
        serve: Option<u16>,
        /// With --serve, wait for a client before searching.
        #[arg(long)]
        paused: bool,
    },
    /// Nimber of a position.
    Nimber {
        #[arg(long)]
        position: String,
        #[command(flatten)]
        solver: Solver,
    },
    /// Outcome of a position plus a nim heap.
    Outcome {
        #[arg(long)]
        position: String,
        #[arg(long, default_value_t = 0)]
        nimber: u32,
        #[command(flatten)]
        solver: Solver,
    },
    /// Key of a position after simplification.
    Canonize {
        #[arg(long)]
        position: String,
    },
    /// Keys of the children of a position.
    Children {
        #[arg(long)]
        position: String,
    },
    /// Simplified form of a position.
    Simplify {
        #[arg(long)]
        position: String,
    },
    /// Replays a proof against a result table and writes the solution.
    Check {
        #[command(flatten)]
        root: Root,
        #[arg(long, default_value_t = 0)]
        nimber: u32,
        /// Reference result table.
        #[arg(long)]
        db: PathBuf,
        /// Solution tree output.
        #[arg(long)]
        out: PathBuf,
        /// Minimized result table output.
        #[arg(long)]
        min_db: Option<PathBuf>,
        /// Graphviz output.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Leave out positions with fewer lives from the drawing.
        #[arg(long, default_value_t = 0)]
        min_lives: u32,
        /// `full` or `numbers`; numbers also writes `<dot>.legend`.
        #[arg(long, default_value = "full")]
        labels: DotLabels,
    },
    /// Checks a solution tree from the rules alone.
    Verify {
        #[arg(long)]
        solution: PathBuf,
    },
    /// Distinct keys in the complete game tree of the p-spot game.
    CountTree {
        #[arg(long)]
        spots: usize,
        #[arg(long, default_value_t = 10_000_000)]
        limit: usize,
    },
}

fn parse(s: &str) -> Result<Position> {
    Position::parse(s).with_context(|| format!("bad position {s:?}"))
}

fn finish_store(store: &Store) -> Result<()> {
    store.compact().context("writing result table")?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Solve {
            spots,
            solver,
            outcome_only,
            serve: port,
            paused,
        } => {
            let store = solver.store()?;
            let start = Position::start(spots);
            let goal = if outcome_only {
                Goal::Outcome(0)
            } else {
                Goal::Nimber
            };
            let answer = match port {
                None => {
                    let mut search = sprouts_core::Search::new(store.clone(), &start, goal)
                        .with_budget(solver.budget);
                    search.run()?
                }
                Some(port) => {
                    let session = Arc::new(Session::start_with_budget(
                        store.clone(),
                        &start,
                        goal,
                        paused,
                        solver.budget,
                    ));
                    let (tx, rx) = std::sync::mpsc::channel();
                    let server = {
                        let session = session.clone();
                        std::thread::spawn(move || {
                            serve(
                                session,
                                ("127.0.0.1", port),
                                Duration::from_millis(200),
                                Some(tx),
                            )
                        })
                    };
                    if let Ok(addr) = rx.recv_timeout(Duration::from_secs(5)) {
                        eprintln!("serving on {addr}");
                    } else if server.is_finished() {
                        server.join().expect("server thread")?;
                    }
                    session.wait().map_err(anyhow::Error::msg)?
                }
            };
            finish_store(&store)?;
            match answer.nimber {
                Some(n) => println!("{}, nimber {}", answer.outcome, n),
                None => println!("{}", answer.outcome),
            }
        }
        Cmd::Nimber { position, solver } => {
            let store = solver.store()?;
            let n = Engine::new(store.clone())
                .with_budget(solver.budget)
                .nimber(&parse(&position)?)?;
            finish_store(&store)?;
            println!("{n}");
        }
        Cmd::Outcome {
            position,
            nimber,
            solver,
        } => {
            let store = solver.store()?;
            let o = Engine::new(store.clone())
                .with_budget(solver.budget)
                .outcome(&parse(&position)?, nimber)?;
            finish_store(&store)?;
            println!("{o}");
        }
        Cmd::Canonize { position } => {
            let p = simplify(&parse(&position)?);
            println!("{}", canon::try_canonical_form(&p)?.key);
        }
        Cmd::Children { position } => {
            let p = canonical_form(&simplify(&parse(&position)?)).position;
            for c in children(&p) {
                println!("{}", c.render()?);
            }
        }
        Cmd::Simplify { position } => {
            println!("{}", simplify(&parse(&position)?).render()?);
        }
        Cmd::Check {
            root,
            nimber,
            db,
            out,
            min_db,
            dot,
            min_lives,
            labels,
        } => {
            let reference =
                Store::import(&db).with_context(|| format!("reading {}", db.display()))?;
            let (tree, minimized) = check_compute(&root.position()?, nimber, &reference)?;
            std::fs::write(&out, tree.to_text())
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = min_db {
                minimized.export(&path)?;
            }
            if let Some(path) = dot {
                let (graph, legend) = tree.to_dot(min_lives, labels);
                std::fs::write(&path, graph)?;
                if let Some(legend) = legend {
                    let mut lp = path.into_os_string();
                    lp.push(".legend");
                    std::fs::write(lp, legend)?;
                }
            }
            println!(
                "{}, {} couples, {} records",
                tree.root_outcome(),
                tree.nodes.len(),
                minimized.len()
            );
        }
        Cmd::Verify { solution } => {
            let text = std::fs::read_to_string(&solution)
                .with_context(|| format!("reading {}", solution.display()))?;
            let tree: SolutionTree = text.parse()?;
            let report = verify_solution(&tree);
            if !report.passed() {
                for f in &report.failures {
                    eprintln!("{f}");
                }
                bail!("{} failures", report.failures.len());
            }
            println!("pass: {} is {}", tree.root, tree.root_outcome());
        }
        Cmd::CountTree { spots, limit } => match canon::count_complete_tree(spots, limit) {
            Some(n) => println!("{n}"),
            None => bail!("more than {limit} keys"),
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
