fn main() {
    std::process::exit(hullshape::cli::run(std::env::args_os()));
}
