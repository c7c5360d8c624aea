fn main() -> std::process::ExitCode {
    holevo_limits::cli::main()
}
