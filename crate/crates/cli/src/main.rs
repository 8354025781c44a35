fn main() {
    // filled in as the pipeline lands
}
