fn main() {
    std::process::exit(ecs_tfqkd::cli::run());
}
