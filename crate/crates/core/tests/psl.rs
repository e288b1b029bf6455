//! The public suffix list's own conformance cases against the bundled list.
//! Cases with punycode or non-ASCII hosts are left out.

use phishlens::url::PublicSuffixList;

fn unquote(s: &str) -> Option<String> {
    let s = s.trim();
    (s != "null").then(|| s.trim_matches('\'').to_string())
}

#[test]
fn conformance_cases() {
    let psl = PublicSuffixList::bundled();
    let text = include_str!("data/psl_tests.txt");
    let mut checked = 0;
    let mut failures = Vec::new();
    for line in text.lines() {
        let Some(args) = line
            .trim()
            .strip_prefix("checkPublicSuffix(")
            .and_then(|r| r.strip_suffix(");"))
        else {
            continue;
        };
        if !args.is_ascii() || args.contains("xn--") {
            continue;
        }
        let (input, expected) = args.split_once(',').unwrap();
        let (Some(input), expected) = (unquote(input), unquote(expected)) else {
            continue;
        };
        let host = input.to_ascii_lowercase();
        let got = if host.split('.').any(str::is_empty) {
            None
        } else {
            psl.registrable_domain(&host).map(str::to_string)
        };
        if got != expected {
            failures.push(format!("{input}: got {got:?}, want {expected:?}"));
        }
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} cases");
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
