fn main() {
    for s in [500.0, 2000.0] {
        let set = fluxladder_oracle::golden::ramp_golden(s);
        println!("{s} steps/ns: {:?}", set.values[0].value);
    }
}
