use super::*;
use proptest::prelude::*;

fn alice() -> AttributeList {
    AttributeList::new(["UD", "PhD Student", "Female"]).unwrap()
}

fn bob() -> AttributeList {
    AttributeList::new(["UD", "Master Student", "Male"]).unwrap()
}

fn meeting_notes_policy() -> AccessPolicy {
    AccessPolicy::parse("AA_UD:UD\nAA_UD:PhD Student\nGender*\n").unwrap()
}

/// Reference relation written straight from the definition over raw
/// strings: `S ⊨ W` iff for all i, `S_i = W_i` or `W_i = *`.
fn oracle(s: &[&str], w: &[Option<&str>]) -> bool {
    assert_eq!(s.len(), w.len());
    let mut ok = true;
    for i in 0..s.len() {
        ok &= match w[i] {
            None => true,
            Some(lit) => s[i] == lit,
        };
    }
    ok
}

fn policy_from(w: &[Option<&str>]) -> AccessPolicy {
    AccessPolicy::new(
        w.iter()
            .map(|t| match t {
                Some(v) => Term::literal("AA", v),
                None => Term::wildcard(),
            })
            .collect(),
    )
    .unwrap()
}

/// All sequences of length `n` over `alphabet`.
fn sequences<T: Clone>(alphabet: &[T], n: usize) -> Vec<Vec<T>> {
    (0..n).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect()
    })
}

#[test]
fn alice_satisfies_bob_does_not() {
    let w = meeting_notes_policy();
    assert!(satisfies(&alice(), &w).unwrap());
    assert!(!satisfies(&bob(), &w).unwrap());
}

#[test]
fn all_wildcard_policy_accepts_everything() {
    let w = AccessPolicy::parse("*\n*\n*\n").unwrap();
    assert!(w.index_set().is_empty());
    assert!(satisfies(&alice(), &w).unwrap());
    assert!(satisfies(&bob(), &w).unwrap());
    assert!(w.required_tokens().unwrap().is_empty());
}

#[test]
fn length_mismatch_is_an_error() {
    let w = meeting_notes_policy();
    let short = AttributeList::new(["UD", "PhD Student"]).unwrap();
    assert_eq!(
        satisfies(&short, &w),
        Err(PolicyError::LengthMismatch {
            attributes: 2,
            policy: 3
        })
    );
}

#[test]
fn satisfying_count_matches_closed_form() {
    // k^(n - |I_W|) lists satisfy W, checked by enumeration.
    let alphabet = ["a", "b", "c"];
    for n in 1..=4 {
        for k in 1..=3 {
            let letters = &alphabet[..k];
            let mut terms: Vec<Option<&str>> = letters.iter().map(|l| Some(*l)).collect();
            terms.push(None);
            for w in sequences(&terms, n) {
                let policy = policy_from(&w);
                let count = sequences(letters, n)
                    .iter()
                    .filter(|s| satisfies(&AttributeList::new(s.iter()).unwrap(), &policy).unwrap())
                    .count();
                let free = n - policy.index_set().len();
                assert_eq!(count, k.pow(free as u32), "n={n} k={k} w={w:?}");
            }
        }
    }
}

#[test]
fn required_tokens_for_meeting_notes() {
    let tokens = meeting_notes_policy().required_tokens().unwrap();
    let expected: BTreeSet<_> = [(1, "AA_UD", "UD"), (2, "AA_UD", "PhD Student")]
        .into_iter()
        .map(|(p, a, v)| RequiredToken {
            position: p,
            authority: a.into(),
            value: v.into(),
        })
        .collect();
    assert_eq!(tokens, expected);
}

#[test]
fn same_value_at_two_positions_needs_two_tokens() {
    let w = AccessPolicy::parse("AA:a\nAA:a\n").unwrap();
    assert_eq!(w.required_tokens().unwrap().len(), 2);
}

#[test]
fn required_tokens_span_two_authorities() {
    let w = AccessPolicy::parse("AA_UD:UD\nAA_DMV:Licensed Driver\n*\n").unwrap();
    let authorities: BTreeSet<_> = w.required_tokens().unwrap().into_iter().map(|t| t.authority).collect();
    assert_eq!(authorities.len(), 2);
}

#[test]
fn unbound_literal_has_no_token() {
    let w = AccessPolicy::parse("UD\n*\n").unwrap();
    assert_eq!(w.required_tokens(), Err(PolicyError::UnboundAuthority { position: 1 }));
    // Still evaluable as a policy.
    assert!(w.satisfied_by(&AttributeList::new(["UD", "x"]).unwrap()).unwrap());
}

#[test]
fn index_set_tracks_literals() {
    assert_eq!(meeting_notes_policy().index_set(), BTreeSet::from([0, 1]));
}

#[test]
fn comparison_normalizes() {
    // "é" precomposed vs. decomposed, plus surrounding whitespace.
    let w = AccessPolicy::parse("AA:Caf\u{e9}\n").unwrap();
    let s = AttributeList::new(["  Cafe\u{301} "]).unwrap();
    assert!(satisfies(&s, &w).unwrap());
}

#[test]
fn parse_rejects_degenerate_input() {
    assert_eq!(AccessPolicy::parse(""), Err(PolicyError::Empty));
    assert_eq!(AccessPolicy::parse("# only a comment\n"), Err(PolicyError::Empty));
    assert_eq!(
        AccessPolicy::parse("AA:\n"),
        Err(PolicyError::EmptyValue { position: 1 })
    );
    assert!(matches!(
        AccessPolicy::parse(":UD\n"),
        Err(PolicyError::Invalid { position: 1, .. })
    ));
    assert_eq!(
        AttributeList::parse_csv("UD,,x"),
        Err(PolicyError::EmptyValue { position: 2 })
    );
}

#[test]
fn labelled_wildcard_renders_back() {
    let w = meeting_notes_policy();
    assert_eq!(w.render(), "AA_UD:UD\nAA_UD:PhD Student\nGender*\n");
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let word = "[A-Za-z][A-Za-z0-9 _.-]{0,8}[A-Za-z0-9]";
    prop_oneof![
        (word, word).prop_map(|(a, v)| Term::literal(&a, &v)),
        word.prop_map(|v| Term::unbound(&v)),
        Just(Term::wildcard()),
        word.prop_map(|l| Term::Wildcard { label: Some(l) }),
    ]
}

proptest! {
    #[test]
    fn parse_render_round_trip(terms in prop::collection::vec(term_strategy(), 1..6)) {
        let policy = AccessPolicy::new(terms).unwrap();
        prop_assert_eq!(AccessPolicy::parse(&policy.render()).unwrap(), policy);
    }

    #[test]
    fn wildcarding_a_position_never_revokes(
        s in prop::collection::vec(0u8..3, 1..5),
        w in prop::collection::vec(prop::option::of(0u8..3), 1..5),
        pos in any::<prop::sample::Index>(),
    ) {
        let n = s.len().min(w.len());
        let names = ["a", "b", "c"];
        let s: Vec<&str> = s[..n].iter().map(|i| names[*i as usize]).collect();
        let w: Vec<Option<&str>> = w[..n].iter().map(|t| t.map(|i| names[i as usize])).collect();
        let list = AttributeList::new(s.iter()).unwrap();
        let before = satisfies(&list, &policy_from(&w)).unwrap();
        let mut relaxed = w.clone();
        relaxed[pos.index(n)] = None;
        let after = satisfies(&list, &policy_from(&relaxed)).unwrap();
        prop_assert!(!before || after);
    }

    #[test]
    fn satisfies_agrees_with_required_tokens(
        s in prop::collection::vec(0u8..3, 1..5),
        w in prop::collection::vec(prop::option::of(0u8..3), 1..5),
    ) {
        let n = s.len().min(w.len());
        let names = ["a", "b", "c"];
        let s: Vec<&str> = s[..n].iter().map(|i| names[*i as usize]).collect();
        let terms: Vec<Term> = w[..n]
            .iter()
            .enumerate()
            .map(|(i, t)| match t {
                // Alternate between two authorities so one authority often
                // covers several positions.
                Some(v) => Term::literal(&format!("AA{}", i % 2), names[*v as usize]),
                None => Term::wildcard(),
            })
            .collect();
        let policy = AccessPolicy::new(terms).unwrap();
        let list = AttributeList::new(s.iter()).unwrap();
        // Every required token must be matched by the list at its position.
        let tokens_met = policy
            .required_tokens()
            .unwrap()
            .iter()
            .all(|t| s[t.position - 1] == t.value && t.authority == format!("AA{}", (t.position - 1) % 2));
        prop_assert_eq!(satisfies(&list, &policy).unwrap(), tokens_met);
        let w_raw: Vec<Option<&str>> = w[..n].iter().map(|t| t.map(|i| names[i as usize])).collect();
        prop_assert_eq!(tokens_met, oracle(&s, &w_raw));
    }

    #[test]
    fn length_mismatch_is_never_false(a in 1usize..6, b in 1usize..6) {
        prop_assume!(a != b);
        let list = AttributeList::new(vec!["x"; a]).unwrap();
        let policy = AccessPolicy::new(vec![Term::wildcard(); b]).unwrap();
        let mismatch = matches!(satisfies(&list, &policy), Err(PolicyError::LengthMismatch { .. }));
        prop_assert!(mismatch);
    }
}
