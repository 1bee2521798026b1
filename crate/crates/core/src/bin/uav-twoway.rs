fn main() {
    let code = uav_twoway::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
