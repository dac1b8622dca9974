//! The command-line pipeline driven by an INI-style config file, with one
//! flag overriding the file.
//!
//! cargo run --release --example config_file_run

use std::fs;

fn main() -> shapeopt::Result<()> {
    let dir = std::env::temp_dir().join(format!("shapeopt-example-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let ini = dir.join("run.ini");
    let out = dir.join("disk.csv");
    fs::write(&ini, "# compute F_q on a mode-3 domain\ncommand = compute\ndomain = mode:3:0.1\nq = 2\nmesh-level = 12\nformat = csv\n")?;
    let code = shapeopt::cli::main_with_args([
        "shapeopt",
        "--config",
        ini.to_str().unwrap(),
        "--q",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    println!("exit {code}\n{}", fs::read_to_string(&out)?);
    fs::remove_dir_all(&dir)?;
    Ok(())
}
