fn main() -> std::process::ExitCode {
    geokit::cli::main()
}
