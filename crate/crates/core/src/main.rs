fn main() -> std::process::ExitCode {
    orlicz::cli::run()
}
