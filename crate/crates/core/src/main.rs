fn main() -> std::process::ExitCode {
    chaninfo::cli::main_entry()
}
