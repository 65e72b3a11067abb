fn main() {
    std::process::exit(clustergas::cli::run());
}
