fn main() {
    std::process::exit(couplediv::cli::main_with_std_io());
}
