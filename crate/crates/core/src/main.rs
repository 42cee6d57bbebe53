fn main() -> std::process::ExitCode {
    errw::cli::main()
}
