fn main() {
    std::process::exit(eeg_setup::cli::main_with_args(std::env::args_os()));
}
