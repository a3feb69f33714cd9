fn main() { std::process::exit(netcontract::cli::main_entry()); }
