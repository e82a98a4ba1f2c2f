fn main() {
    std::process::exit(matnorm_diag::io::cli::cli_main(std::env::args_os()));
}
