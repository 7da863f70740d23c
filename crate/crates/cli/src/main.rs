fn main() {
    std::process::exit(locband::dispatch(std::env::args_os()));
}
