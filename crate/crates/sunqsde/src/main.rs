fn main() -> std::process::ExitCode {
    sunqsde::cli::main()
}
