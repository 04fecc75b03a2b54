fn main() -> std::process::ExitCode {
    chn_core::cli::main()
}
