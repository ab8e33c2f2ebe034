fn main() {
    std::process::exit(gspline::cli::run(std::env::args_os()));
}
