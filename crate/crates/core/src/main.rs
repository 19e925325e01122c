fn main() {
    std::process::exit(flowscope::manager::cli_main(std::env::args_os()));
}
