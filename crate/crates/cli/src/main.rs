use std::io;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let code = heightlab_cli::dispatch(&argv, &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
