use harmonic_core::acceptance::run;

fn check(id: u8) {
    let outcome = run(id).expect("known criterion");
    println!("{}", outcome.line());
    assert!(outcome.pass, "{}", outcome.line());
}

#[test]
fn criterion_01() {
    check(1);
}

#[test]
fn criterion_02() {
    check(2);
}

#[test]
fn criterion_03() {
    check(3);
}

#[test]
fn criterion_04() {
    check(4);
}

#[test]
fn criterion_05() {
    check(5);
}

#[test]
fn criterion_06() {
    check(6);
}

#[test]
fn criterion_07() {
    check(7);
}

#[test]
fn criterion_08() {
    check(8);
}

#[test]
fn criterion_09() {
    check(9);
}

#[test]
fn criterion_10() {
    check(10);
}
