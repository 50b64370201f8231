use std::io::{self, BufRead, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let stdin = io::stdin();
    let mut out: Box<dyn Write> = Box::new(stdout.lock());
    let mut err: Box<dyn Write> = Box::new(stderr.lock());
    let mut input: Box<dyn BufRead> = Box::new(stdin.lock());
    let code = cstn::cli::cli_main(&args, &mut out, &mut err, &mut input);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
