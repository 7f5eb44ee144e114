fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let status = langevin_bench::run(std::env::args_os());
    std::process::exit(status as i32);
}
