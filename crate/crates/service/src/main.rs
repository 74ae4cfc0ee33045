fn main() -> std::process::ExitCode {
    retrace_service::cli::main()
}
