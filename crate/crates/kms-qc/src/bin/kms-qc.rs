use clap::Parser;

fn main() {
    let cli = kms_qc::cli::Cli::parse();
    let out = kms_qc::cli::run(&cli);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
