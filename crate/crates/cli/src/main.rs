use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use unexpand::debugger::{interactive_loop, DebugIo, DebugSession, ScriptIo, View};
use unexpand::program::{run_query, LoadError};
use unexpand::protocol::{self, DEFAULT_PORT};
use unexpand::{load_program, Program, Registry};

#[derive(Parser)]
#[command(name = "unexpand", version, about = "Logic programs with reversible language extensions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the expanded program and its symbol table.
    Expand {
        file: PathBuf,
        /// Erase all source annotations.
        #[arg(long)]
        strip: bool,
    },
    /// Print every answer to a goal.
    Run {
        file: PathBuf,
        #[arg(short = 'g', long = "goal")]
        goal: String,
    },
    /// Trace a goal in the debugger.
    Debug {
        file: PathBuf,
        #[arg(short = 'g', long = "goal")]
        goal: String,
        #[arg(long, value_enum, default_value = "source")]
        view: ViewArg,
        /// Read debugger commands from a file, one per line.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Serve debugging sessions over the JSON line protocol.
    Serve {
        file: PathBuf,
        #[arg(short = 'g', long = "goal")]
        goal: String,
        /// TCP port; 0 serves one session on stdin and stdout.
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ViewArg {
    Source,
    Target,
}

struct Failure(String);

fn styled_error(msg: &str) {
    let plain = std::env::var_os("UNEXPAND_NO_COLOR").is_some() || !io::stderr().is_terminal();
    if plain {
        eprintln!("error: {msg}");
    } else {
        eprintln!("\x1b[1;31merror:\x1b[0m {msg}");
    }
}

fn module_name(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "user".to_string())
}

fn load(file: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure(format!("{}: {e}", file.display())))?;
    load_program(&text, &module_name(file), &Registry::standard()).map_err(|e| located(file, &e))
}

fn located(file: &Path, e: &LoadError) -> Failure {
    match e.position() {
        Some(_) => Failure(format!("{}:{e}", file.display())),
        None => Failure(format!("{}: {e}", file.display())),
    }
}

fn expand(file: &Path, strip: bool) -> Result<(), Failure> {
    let p = load(file)?;
    let text = p.listing(strip).map_err(|e| located(file, &e.into()))?;
    for w in &p.warnings {
        eprintln!("{}: warning: {w}", file.display());
    }
    print!("{text}");
    Ok(())
}

fn run(file: &Path, goal: &str) -> Result<(), Failure> {
    let p = load(file)?;
    let lines = run_query(&p, goal).map_err(|e| Failure(format!("goal: {e}")))?;
    for l in lines {
        println!("{l}");
    }
    Ok(())
}

/// Prompts on stdout and reads replies from stdin.
struct Terminal;

impl DebugIo for Terminal {
    fn prompt(&mut self, text: &str) -> Option<String> {
        let mut out = io::stdout();
        let _ = write!(out, "{text}");
        let _ = out.flush();
        let mut line = String::new();
        match io::stdin().lock().read_line(&mut line) {
            Ok(0) | Err(_) => {
                println!();
                None
            }
            Ok(_) => Some(line.trim_end_matches(['\n', '\r']).to_string()),
        }
    }

    fn message(&mut self, text: &str) {
        println!("{text}");
    }
}

fn debug(file: &Path, goal: &str, view: ViewArg, script: Option<&Path>) -> Result<(), Failure> {
    let p = load(file)?;
    let q = p.parse_query(goal).map_err(|e| Failure(format!("goal:{e}")))?;
    let view = match view {
        ViewArg::Source => View::Source,
        ViewArg::Target => View::Target,
    };
    let mut sess = DebugSession::new(&p, view);
    let outcome = match script {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            let mut io = ScriptIo::new(&text);
            let o = interactive_loop(&mut sess, &q, &mut io);
            print!("{}", io.transcript);
            o
        }
        None => interactive_loop(&mut sess, &q, &mut Terminal),
    };
    match outcome.error {
        Some(e) => Err(Failure(format!("goal: {e}"))),
        None => Ok(()),
    }
}

fn serve(file: &Path, goal: &str, port: u16) -> Result<(), Failure> {
    let p = load(file)?;
    let name = file.display().to_string();
    let io_err = |e: io::Error| Failure(e.to_string());
    if port == 0 {
        return protocol::serve_stdio(&p, &name, goal).map_err(io_err);
    }
    let listener = std::net::TcpListener::bind(("127.0.0.1", port)).map_err(io_err)?;
    eprintln!("listening on {}", listener.local_addr().map_err(io_err)?);
    protocol::serve_listener(listener, Arc::new(p), name, goal.to_string()).map_err(io_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Expand { file, strip } => expand(file, *strip),
        Cmd::Run { file, goal } => run(file, goal),
        Cmd::Debug {
            file,
            goal,
            view,
            script,
        } => debug(file, goal, *view, script.as_deref()),
        Cmd::Serve { file, goal, port } => serve(file, goal, *port),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            styled_error(&msg);
            ExitCode::from(1)
        }
    }
}
