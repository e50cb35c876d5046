fn main() {
    std::process::exit(critchar::cli::main_entry());
}
