// Drives the command line on a bundled scenario, as a batch job would.
fn run_example() {
    let dir = std::env::temp_dir().join(format!("workbench-batch-{}", std::process::id()));
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/data/scenarios/rect_hollow.json");
    let args = ["workbench", "rectguide", "--scenario", scenario, "--out", dir.to_str().unwrap()];
    let code = workbench::cli::run(args.iter().map(std::ffi::OsString::from));
    println!("exit code {code}");
    for entry in std::fs::read_dir(&dir).unwrap() {
        println!("wrote {}", entry.unwrap().file_name().to_string_lossy());
    }
    std::fs::remove_dir_all(&dir).ok();
}

fn main() {
    run_example();
}
