fn main() -> std::process::ExitCode {
    plenopsim::cli::main()
}
