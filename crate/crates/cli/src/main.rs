fn main() {
    std::process::exit(freqgan_cli::run(std::env::args_os()));
}
