// Driving the command-line front end in-process and reading its JSON
// report back.

use gptmint::cli::{main_with_args, RunReport};
use gptmint::{Error, Result};

pub fn run_example() -> Result<()> {
    let out = std::env::temp_dir().join(format!("gptmint-example-{}.json", std::process::id()));
    let code = main_with_args([
        "gptmint",
        "repeat",
        "--theory",
        "gbit",
        "--delta",
        "1e-3",
        "--out",
        out.to_str().expect("temp path is UTF-8"),
    ]);
    if code != 0 {
        return Err(Error::Invalid(format!("repeat exited with {}", code)));
    }
    let text = std::fs::read_to_string(&out).map_err(|e| Error::Invalid(e.to_string()))?;
    let _ = std::fs::remove_file(&out);
    let report: RunReport = serde_json::from_str(&text).map_err(|e| Error::Invalid(e.to_string()))?;
    print!("{}", report.to_text());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
