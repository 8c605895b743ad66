fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SPTG_LOG")).init();
    let code = sptg::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
