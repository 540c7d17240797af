fn main() {
    eprintln!("placeholder");
}
