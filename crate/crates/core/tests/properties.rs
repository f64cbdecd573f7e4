use std::collections::HashMap;

use proptest::prelude::*;

use eqrel_ramsey::alternation::{
    canonical_finest, random_alternating, sigma, validate_alternating, validate_class_constraint, ConstraintSeq,
    Partition,
};
use eqrel_ramsey::coding::CodingContext;
use eqrel_ramsey::eqrel::{coarsen, coarsenings, depth, leq_fin, Depth, FiniteEqRel, JoinSpec};
use eqrel_ramsey::harness::{bell, ClopenColouring};
use eqrel_ramsey::ordinal::{project_k, OrdinalElem, rigid_to_eqrel, transfer, Bijection, Cnf, Rigid, Target};
use eqrel_ramsey::words::{
    concat, hj_line_search, lv_hj_bounded_search, substitute, verify_monochromatic, Alphabet, Letter, LetterSet,
    SearchOptions, SearchOutcome, SemigroupMode, Symbol, Verification, Word,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn partition_strategy() -> impl Strategy<Value = Partition> {
    prop_oneof![(1usize..=5).prop_map(|l| Partition::residue(l).unwrap()), Just(Partition::Dyadic)]
}

fn scalar_word(max_letter: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..max_letter, 0..=max_len).prop_map(|v| Word::from_scalars(&v))
}

fn variable_word(max_letter: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::option::weighted(0.7, 0..max_letter), 1..=max_len).prop_map(|v| {
        let mut syms: Vec<Symbol> =
            v.into_iter().map(|s| s.map_or(Symbol::Var, |k| Symbol::Letter(Letter::scalar(k)))).collect();
        syms[0] = Symbol::Var;
        Word(syms)
    })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn canonical_form_is_idempotent(labels in prop::collection::vec(0u8..6, 0..40)) {
        let a = FiniteEqRel::canonical_form(&labels);
        prop_assert_eq!(FiniteEqRel::canonical_form(a.assign()), a.clone());
        prop_assert_eq!(FiniteEqRel::from_assign(a.assign().to_vec()).unwrap(), a.clone());
        for (i, &r) in a.assign().iter().enumerate() {
            prop_assert!(r <= i);
            prop_assert_eq!(labels[r], labels[i]);
        }
    }

    #[test]
    fn finite_text_and_json_round_trip(labels in prop::collection::vec(0u8..5, 0..30)) {
        let a = FiniteEqRel::canonical_form(&labels);
        let text: FiniteEqRel = a.to_string().parse().unwrap();
        prop_assert_eq!(&text, &a);
        let json = serde_json::to_string(&a).unwrap();
        let back: FiniteEqRel = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn approximations_have_matching_lengths_and_depths(
        p in partition_strategy(),
        seed in any::<u64>(),
        keep in 0.2f64..1.0,
    ) {
        let e = random_alternating(&p, &ConstraintSeq::All, seed, keep).unwrap();
        let mut previous = FiniteEqRel::empty();
        for n in 0..=12usize {
            let a = e.approx(n).unwrap();
            prop_assert_eq!(a.len(), n);
            prop_assert_eq!(depth(&a, &e), Depth::Finite(n));
            let restricted = a.restrict(previous.domain_size());
            prop_assert_eq!(restricted.as_ref(), Some(&previous));
            previous = a;
        }
    }

    #[test]
    fn random_members_pass_both_checks(
        p in partition_strategy(),
        geq in any::<bool>(),
        seed in any::<u64>(),
        keep in 0.2f64..1.0,
    ) {
        let c = if geq { ConstraintSeq::Geq } else { ConstraintSeq::All };
        let e = random_alternating(&p, &c, seed, keep).unwrap();
        prop_assert!(validate_alternating(&e, &p, 24).is_ok());
        prop_assert!(validate_class_constraint(&e, &p, &c, 24).is_ok());
    }

    #[test]
    fn merging_a_class_moves_it_under_the_target(
        seed in any::<u64>(),
        from in 1usize..10,
        to_frac in 0.0f64..1.0,
    ) {
        let p = Partition::residue(2).unwrap();
        let e = random_alternating(&p, &ConstraintSeq::All, seed, 0.5).unwrap();
        let to = ((from as f64) * to_frac) as usize;
        let f = coarsen(&e, &JoinSpec::finite([(from, to)]).unwrap());
        let reps = e.reps(from + 2);
        prop_assert_eq!(f.rep_of(reps[from]), reps[to]);
        prop_assert_ne!(f.approx(from + 1), e.approx(from + 1));
        let m = reps[from + 1];
        prop_assert!(leq_fin(&f.prefix(m), &e.prefix(m)));
    }

    #[test]
    fn sigma_is_the_two_adic_valuation(k in 0usize..(1 << 20)) {
        let s = sigma(k);
        prop_assert_eq!((k + 1) % (1 << s), 0);
        prop_assert_ne!((k + 1) % (1 << (s + 1)), 0);
    }

    #[test]
    fn substitution_is_a_homomorphism(
        x in variable_word(3, 6),
        y in variable_word(3, 6),
        z in scalar_word(3, 6),
        lam in 0u32..3,
    ) {
        let alphabet = Alphabet::Finite(LetterSet::scalars(3));
        let l = Symbol::Letter(Letter::scalar(lam));
        let lhs = substitute(&concat(&x, &y), &l, &alphabet).unwrap();
        let rhs = concat(&substitute(&x, &l, &alphabet).unwrap(), &substitute(&y, &l, &alphabet).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(substitute(&z, &l, &alphabet).unwrap(), z.clone());
    }

    #[test]
    fn word_text_round_trip(x in variable_word(12, 8), z in scalar_word(4, 8)) {
        let back: Word = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
        let back: Word = z.to_string().parse().unwrap();
        prop_assert_eq!(back, z);
    }

    #[test]
    fn cnf_text_round_trip(beta in cnf_strategy()) {
        let back: Cnf = beta.to_string().parse().unwrap();
        prop_assert_eq!(back, beta);
    }

    #[test]
    fn division_inverts_left_multiplication(beta in cnf_strategy()) {
        prop_assume!(beta >= Cnf::omega());
        let alpha = omega_times(&beta);
        prop_assert_eq!(alpha.divide_by_omega().unwrap(), beta);
    }

    #[test]
    fn projection_keeps_exactly_k_classes(seed in any::<u64>(), k in 1usize..6, l in 2usize..4) {
        let p = Partition::residue(l).unwrap();
        let e = random_alternating(&p, &ConstraintSeq::Geq, seed, 0.5).unwrap();
        let r = transfer(&e, &p, &Target::OmegaTimes(l), 8).unwrap();
        let projected = project_k(&r, k).unwrap();
        let reps = projected.backing().reps(k + 1);
        prop_assert_eq!(reps.len(), k);
        prop_assert_eq!(&reps[..], &e.reps(k)[..]);
    }

    #[test]
    fn rigid_fibre_minima_are_ordered(seed in any::<u64>(), l in 1usize..4, fresh in 0.1f64..0.9) {
        let g = Rigid::random(l, 12, seed, fresh).unwrap();
        let mut min_of: HashMap<OrdinalElem, OrdinalElem> = HashMap::new();
        for (j, v) in g.values().iter().enumerate() {
            let e = OrdinalElem::new(j / l, Cnf::nat((j % l) as u64));
            min_of.entry(v.clone()).and_modify(|m| if e < *m { *m = e.clone() }).or_insert(e);
        }
        let mut values: Vec<_> = min_of.into_iter().collect();
        values.sort();
        for w in values.windows(2) {
            prop_assert!(w[0].1 < w[1].1, "{} before {} but fibre minima out of order", w[0].0, w[1].0);
        }
        let r = rigid_to_eqrel(&g).unwrap();
        prop_assert_eq!(r.backing().prefix(l * 12).len(), values.len());
    }

    #[test]
    fn clopen_colour_reads_only_the_first_elements(
        depth in 1usize..8,
        seed in any::<u64>(),
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let p = Partition::residue(2).unwrap();
        let a = random_alternating(&p, &ConstraintSeq::All, s1, 0.5).unwrap();
        let b = random_alternating(&p, &ConstraintSeq::All, s2, 0.5).unwrap();
        let c = ClopenColouring::new(depth, 3, seed).unwrap();
        let len = a.rep(depth).unwrap().max(b.rep(depth).unwrap());
        if a.prefix(depth) == b.prefix(depth) {
            prop_assert_eq!(c.colour(&a.prefix(len)), c.colour(&b.prefix(len)));
        }
        let glued = FiniteEqRel::from_assign(
            a.prefix(depth).assign().iter().copied().chain(depth..len).collect()
        ).unwrap();
        prop_assert_eq!(c.colour(&glued), c.colour(&a.prefix(len)));
    }
}

fn cnf_strategy() -> impl Strategy<Value = Cnf> {
    let exponents: Vec<Cnf> = ["0", "1", "2", "3", "w", "w + 1", "w*2", "w^2", "w^w"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    prop::collection::btree_map(0..exponents.len(), 1u64..6, 1..4).prop_map(move |m| {
        let mut terms: Vec<(Cnf, u64)> = m.into_iter().map(|(i, c)| (exponents[i].clone(), c)).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Cnf::from_terms(terms).unwrap()
    })
}

/// `ω·β`, term by term: `ω·ω^e = ω^{1+e}`.
fn omega_times(beta: &Cnf) -> Cnf {
    let terms = beta
        .terms()
        .iter()
        .map(|(e, c)| {
            let e1 = match e.as_nat() {
                Some(k) => Cnf::nat(k + 1),
                None => e.clone(),
            };
            (e1, *c)
        })
        .collect();
    Cnf::from_terms(terms).unwrap()
}

#[test]
fn canonical_members_pass_at_every_depth() {
    let spaces = [
        (Partition::residue(1).unwrap(), ConstraintSeq::All),
        (Partition::residue(2).unwrap(), ConstraintSeq::All),
        (Partition::residue(3).unwrap(), ConstraintSeq::Geq),
        (Partition::residue(5).unwrap(), ConstraintSeq::Geq),
        (Partition::Dyadic, ConstraintSeq::All),
        (Partition::Dyadic, ConstraintSeq::Geq),
    ];
    for (p, c) in spaces {
        let e = canonical_finest(&p, &c).unwrap();
        for d in [1, 4, 16, 48] {
            assert!(validate_alternating(&e, &p, d).is_ok(), "{p} {c} depth {d}");
            assert!(validate_class_constraint(&e, &p, &c, d).is_ok(), "{p} {c} depth {d}");
        }
    }
}

#[test]
fn residue_blocks_receive_equal_shares() {
    for l in 1..=5usize {
        let p = Partition::residue(l).unwrap();
        let e = canonical_finest(&p, &ConstraintSeq::All).unwrap();
        for n in [1, 3, 10] {
            let mut counts = vec![0usize; l];
            for r in e.reps(n * l) {
                counts[p.block_of(r)] += 1;
            }
            assert!(counts.iter().all(|&c| c == n), "l={l} N={n}: {counts:?}");
        }
    }
}

#[test]
fn coarsening_fans_have_bell_size() {
    for m in 0..=7usize {
        for labels in [(0..m).collect::<Vec<_>>(), (0..m).map(|i| i / 2).collect()] {
            let b = FiniteEqRel::canonical_form(&labels);
            let fan = coarsenings(&b);
            assert_eq!(fan.len() as u64, bell(b.len()), "{b}");
            assert!(fan.iter().all(|a| leq_fin(a, &b)));
            let brute = eqrel_ramsey::eqrel::all_relations(m).into_iter().filter(|a| leq_fin(a, &b)).count();
            assert_eq!(brute, fan.len(), "{b}");
        }
    }
}

#[test]
fn gamma_enumeration_lists_copies_by_sigma() {
    let target = Target::alpha_with("w^2".parse().unwrap(), Bijection::from_spec("id", Cnf::omega()).unwrap()).unwrap();
    let mut seen = std::collections::HashSet::new();
    for n in 0..(1usize << 12) {
        let g = target.preceq_elem(n);
        assert_eq!(g.copy, Cnf::nat(sigma(n) as u64));
        assert_eq!(target.preceq_index(&g).unwrap(), n);
        assert!(seen.insert(g));
    }
}

/// Variable words of length `n` over `letters`, by brute force.
fn lines_oracle(k: u32, n: usize, colour: &dyn Fn(&[u32]) -> u32) -> bool {
    let total = (k as usize + 1).pow(n as u32);
    (0..total).any(|mut code| {
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            x.push((code % (k as usize + 1)) as u32);
            code /= k as usize + 1;
        }
        if !x.contains(&k) {
            return false;
        }
        let colours: Vec<u32> = (0..k)
            .map(|l| colour(&x.iter().map(|&s| if s == k { l } else { s }).collect::<Vec<_>>()))
            .collect();
        colours.windows(2).all(|w| w[0] == w[1])
    })
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn line_search_agrees_with_brute_force(k in 1u32..=3, n in 1usize..=3, seed in any::<u64>(), r in 2u32..4) {
        let colour = move |w: &[u32]| {
            let h = w.iter().fold(seed, |h, &s| h.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(u64::from(s) + 1));
            ((h >> 33) % u64::from(r)) as u32
        };
        let letters: Vec<Letter> = (0..k).map(Letter::scalar).collect();
        let lib = |w: &Word| {
            let s: Vec<u32> = w.letters().unwrap().iter().map(|l| l.coords()[0]).collect();
            colour(&s)
        };
        let found = hj_line_search(&letters, n, &lib);
        prop_assert_eq!(found.is_some(), lines_oracle(k, n, &colour));
        if let Some(x) = found {
            let cs: Vec<u32> = letters.iter().map(|l| lib(&x.substitute_unchecked(&Symbol::Letter(l.clone())))).collect();
            prop_assert!(cs.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn search_certificates_verify_at_smaller_budgets(seed in any::<u64>(), modulus in 2u32..4, budget in 4usize..8) {
        let alphabet = Alphabet::Finite(LetterSet::scalars(2));
        let colour = move |w: &Word| {
            let ones = w.letters().map_or(0, |ls| ls.iter().filter(|l| l.coords()[0] == 1).count());
            ((ones as u64 + seed % 3) % u64::from(modulus)) as u32
        };
        let opts = SearchOptions { node_limit: 200_000, ..SearchOptions::default() };
        if let SearchOutcome::Found { certificate, .. } = lv_hj_bounded_search(&alphabet, &colour, 2, budget, &opts).unwrap() {
            for b in 0..=budget {
                let v = verify_monochromatic(&certificate.w0, &certificate.xs, &alphabet, &colour, SemigroupMode::Plain, b, false).unwrap();
                prop_assert!(matches!(v, Verification::Ok { .. }), "budget {}: {:?}", b, v);
            }
        }
    }
}

fn letter_tuple(n: usize, l: usize) -> impl Strategy<Value = Letter> {
    prop::collection::vec(0..=n as u32, l).prop_map(Letter)
}

fn tuple_variable_word(n: usize, l: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::option::weighted(0.6, letter_tuple(n, l)), 1..=max_len).prop_map(|v| {
        let mut syms: Vec<Symbol> = v.into_iter().map(|s| s.map_or(Symbol::Var, Symbol::Letter)).collect();
        syms[0] = Symbol::Var;
        Word(syms)
    })
}

fn certificate_case() -> impl Strategy<Value = (usize, usize, u64, Word, Vec<Word>)> {
    (0usize..3, 1usize..4, any::<u64>()).prop_flat_map(|(n, l, seed)| {
        (
            Just(n),
            Just(l),
            Just(seed),
            prop::collection::vec(letter_tuple(n, l), 0..3).prop_map(Word::from_letters),
            prop::collection::vec(tuple_variable_word(n, l, 3), 1..4),
        )
    })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn built_f_keeps_whole_blocks_of_reps((n, l, seed, w0, xs) in certificate_case()) {
        let p = Partition::residue(l).unwrap();
        let e = random_alternating(&p, &ConstraintSeq::All, seed, 0.6).unwrap();
        let ctx = CodingContext::new(e.clone(), p.clone(), ConstraintSeq::All, n).unwrap();
        let exp = ctx.expand_certificate(&w0, &xs).unwrap();
        let f = ctx.build_f(&exp).unwrap();
        prop_assert!(validate_alternating(&f, &p, n + 24).is_ok());
        let fa = f.approx(n);
        prop_assert_eq!(fa.as_ref(), Some(ctx.a()));

        let count = n + 1 + xs.len() + 4;
        let fr = f.reps(count);
        let er = e.reps(fr.last().map_or(0, |&x| x + 1));
        let mut last = 0usize;
        for (i, r) in fr.iter().enumerate() {
            let pos = er.iter().position(|x| x == r);
            prop_assert!(pos.is_some(), "p_{} of F is not a rep of E", i);
            let pos = pos.unwrap();
            if i > 0 {
                prop_assert_eq!((pos - last - 1) % l, 0, "gap before p_{} of F is not a multiple of {}", i, l);
            }
            last = pos;
        }

        for x in ctx.f_extensions(&f, xs.len()).unwrap() {
            let w = ctx.translate_word(&w0, &xs, &exp, &x.choice).unwrap();
            prop_assert_eq!(ctx.decode_word(&w).unwrap(), x.b);
        }
    }
}
