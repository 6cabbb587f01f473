fn main() { println!("ka"); }
