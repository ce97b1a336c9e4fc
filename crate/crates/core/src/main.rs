fn main() -> std::process::ExitCode {
    fuzzycell::cli::main()
}
