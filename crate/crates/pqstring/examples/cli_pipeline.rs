//! Driving the command-line front end in-process.

use pqstring::cli::run;

fn main() {
    let code = run(["pqstring", "derive-pde", "--case", "pi2"]);
    println!("exit code {code}");
    let code = run(["pqstring", "fredholm", "--s", "-2", "--check", "--format", "json"]);
    println!("exit code {code}");
}
