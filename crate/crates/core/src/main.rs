use std::io::Write;

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let report = ffgs::cli::run(std::env::args_os());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(report.text().as_bytes());
    let _ = out.flush();
    std::process::exit(report.exit_code);
}
