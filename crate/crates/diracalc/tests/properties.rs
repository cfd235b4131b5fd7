//! Seeded property suites: algebraic identities of the Dorfman bracket,
//! product laws of Lagrangian families, pointwise-oracle equivalence of the
//! symbolic operations, involutivity of sums of commuting constant Poisson
//! structures, and agreement of the two compatibility checks for
//! endomorphisms. All identities are exact polynomial identities.

use diracalc::cartan::{
    dorfman, full_cotangent, full_tangent, graph_bivector, graph_two_form, pairing, Bivector,
    Endomorphism, GenSection, TwoForm,
};
use diracalc::lagrangian::Family;
use diracalc::matrix::PolyMatrix;
use diracalc::nijenhuis::{is_dirac_nijenhuis, pn_check};
use diracalc::pointwise;
use diracalc::poly::Polynomial;
use diracalc::probe::probe_points;
use diracalc::scalar::{FieldMode, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random polynomial of degree ≤ 2 in n variables with small integer
/// coefficients.
fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> Polynomial {
    let mut monomials = vec!["1".to_string()];
    for i in 1..=n {
        monomials.push(format!("x{i}"));
        monomials.push(format!("x{i}^2"));
        for j in (i + 1)..=n {
            monomials.push(format!("x{i}*x{j}"));
        }
    }
    let mut src = String::new();
    for m in &monomials {
        let c: i32 = rng.gen_range(-3..=3);
        if c == 0 {
            continue;
        }
        if src.is_empty() {
            src = format!("{c}*{m}");
        } else if c < 0 {
            src.push_str(&format!("-{}*{m}", -c));
        } else {
            src.push_str(&format!("+{c}*{m}"));
        }
    }
    if src.is_empty() {
        src = "0".to_string();
    }
    Polynomial::parse(&src, n, FieldMode::Rational).unwrap()
}

fn random_section(rng: &mut ChaCha8Rng, n: usize) -> GenSection {
    GenSection::new(
        (0..n).map(|_| random_poly(rng, n)).collect(),
        (0..n).map(|_| random_poly(rng, n)).collect(),
    )
}

/// Derivative of a function along the vector part of a section.
fn lie_on_function(a: &GenSection, f: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(f.var_count());
    for (j, u) in a.vec.iter().enumerate() {
        out = out.add(&u.mul(&f.partial(j).unwrap()).unwrap()).unwrap();
    }
    out
}

#[test]
fn dorfman_leibniz_and_metric_compatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..50 {
        let n = 2 + (case % 3); // dimensions 2, 3, 4
        let a = random_section(&mut rng, n);
        let b = random_section(&mut rng, n);
        let c = random_section(&mut rng, n);
        // Leibniz: [a, [b, c]] = [[a, b], c] + [b, [a, c]].
        let lhs = dorfman(&a, &dorfman(&b, &c).unwrap()).unwrap();
        let rhs = dorfman(&dorfman(&a, &b).unwrap(), &c)
            .unwrap()
            .add(&dorfman(&b, &dorfman(&a, &c).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs, "Leibniz identity failed on case {case}");
        // Metric compatibility: pr_T(a)⟨b, c⟩ = ⟨[a, b], c⟩ + ⟨b, [a, c]⟩.
        let lhs = lie_on_function(&a, &pairing(&b, &c).unwrap());
        let rhs = pairing(&dorfman(&a, &b).unwrap(), &c)
            .unwrap()
            .add(&pairing(&b, &dorfman(&a, &c).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs, "metric compatibility failed on case {case}");
    }
}

/// Random constant Lagrangian family: the graph of a constant bivector or a
/// constant two-form, depending on a coin flip.
fn random_constant_lagrangian(rng: &mut ChaCha8Rng, n: usize) -> Family {
    let constant = |rng: &mut ChaCha8Rng, n: usize| {
        Polynomial::parse(&format!("{}", rng.gen_range(-4..=4i32)), n, FieldMode::Rational).unwrap()
    };
    if rng.gen_bool(0.5) {
        let mut pi = Bivector::zero(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                pi.add_wedge(i, j, constant(rng, n)).unwrap();
            }
        }
        graph_bivector(&pi).unwrap()
    } else {
        let mut om = TwoForm::zero(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                om.add_wedge(i, j, constant(rng, n)).unwrap();
            }
        }
        graph_two_form(&om).unwrap()
    }
}

#[test]
fn product_laws_on_constant_lagrangian_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let n = 2 + (case % 3);
        let l = random_constant_lagrangian(&mut rng, n);
        let r = random_constant_lagrangian(&mut rng, n);
        let s = random_constant_lagrangian(&mut rng, n);
        // Commutativity.
        assert!(l
            .tangent_product(&r)
            .unwrap()
            .family_equal(&r.tangent_product(&l).unwrap()));
        assert!(l
            .cotangent_product(&r)
            .unwrap()
            .family_equal(&r.cotangent_product(&l).unwrap()));
        // Associativity.
        assert!(l
            .tangent_product(&r)
            .unwrap()
            .tangent_product(&s)
            .unwrap()
            .family_equal(&l.tangent_product(&r.tangent_product(&s).unwrap()).unwrap()));
        assert!(l
            .cotangent_product(&r)
            .unwrap()
            .cotangent_product(&s)
            .unwrap()
            .family_equal(&l.cotangent_product(&r.cotangent_product(&s).unwrap()).unwrap()));
        // Identity elements: TM for ⋆ and T*M for ⊛.
        assert!(l.tangent_product(&full_tangent(n)).unwrap().family_equal(&l));
        assert!(l.cotangent_product(&full_cotangent(n)).unwrap().family_equal(&l));
    }
}

fn rows_at(fam: &Family, pt: &[Scalar]) -> Vec<Vec<Scalar>> {
    fam.frame()
        .iter()
        .map(|s| s.coords().iter().map(|p| p.eval(pt).unwrap()).collect())
        .collect()
}

#[test]
fn products_stretch_and_kernel_match_pointwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for case in 0..15 {
        let n = 2 + (case % 3);
        // A symplectic pair with nowhere-vanishing polynomial coefficient:
        // all outputs stay smooth, so spans must agree at every probe.
        let mut pi = Bivector::zero(n, n);
        pi.add_wedge(0, 1, Polynomial::parse("1+x1^2", n, FieldMode::Rational).unwrap())
            .unwrap();
        let l = graph_bivector(&pi).unwrap();
        let r = random_constant_lagrangian(&mut rng, n);
        // Stretch both by the (possibly trivial) kernel of the constant side
        // and by the trivial kernel of the symplectic side.
        let iso = r.kernel().unwrap();
        for pt in probe_points(n, 12, 100 + case as u64) {
            let l_rows = rows_at(&l, &pt);
            let r_rows = rows_at(&r, &pt);
            let star = rows_at(&l.tangent_product(&r).unwrap(), &pt);
            assert!(pointwise::span_equal(
                &star,
                &pointwise::product(&l_rows, &r_rows, n, true)
            ));
            let circled = rows_at(&l.cotangent_product(&r).unwrap(), &pt);
            assert!(pointwise::span_equal(
                &circled,
                &pointwise::product(&l_rows, &r_rows, n, false)
            ));
            let stretched = rows_at(&r.stretch(&iso).unwrap(), &pt);
            assert!(pointwise::span_equal(
                &stretched,
                &pointwise::stretch(&r_rows, &rows_at(&iso, &pt), n)
            ));
            let kernel = rows_at(&r.kernel().unwrap(), &pt);
            assert!(pointwise::span_equal(
                &kernel,
                &pointwise::tangent_kernel(&r_rows, n)
            ));
        }
    }
}

#[test]
fn sums_of_commuting_constant_poisson_structures_are_involutive() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for case in 0..20 {
        let n = 3 + (case % 2);
        let make = |rng: &mut ChaCha8Rng| {
            let mut pi = Bivector::zero(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let c = rng.gen_range(-3..=3i32);
                    pi.add_wedge(
                        i,
                        j,
                        Polynomial::parse(&c.to_string(), n, FieldMode::Rational).unwrap(),
                    )
                    .unwrap();
                }
            }
            pi
        };
        let l = graph_bivector(&make(&mut rng)).unwrap();
        let r = graph_bivector(&make(&mut rng)).unwrap();
        let product = l.cotangent_product(&r).unwrap();
        let report = product.is_involutive().unwrap();
        assert!(report.involutive, "case {case}: {:?}", report.certificate);
    }
}

#[test]
fn dirac_nijenhuis_generator_check_agrees_with_pn_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for case in 0..10 {
        let n = 2 + (case % 2);
        let mut pi = Bivector::zero(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let c = rng.gen_range(-2..=2i32);
                pi.add_wedge(
                    i,
                    j,
                    Polynomial::parse(&c.to_string(), n, FieldMode::Rational).unwrap(),
                )
                .unwrap();
            }
        }
        let mut m = PolyMatrix::new(n, n, n);
        if case % 3 == 0 {
            // Scalar multiple of the identity: compatible with everything.
            let c = rng.gen_range(1..=3i32).to_string();
            for i in 0..n {
                m.set(i, i, Polynomial::parse(&c, n, FieldMode::Rational).unwrap());
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let c = rng.gen_range(-2..=2i32).to_string();
                    m.set(i, j, Polynomial::parse(&c, n, FieldMode::Rational).unwrap());
                }
            }
        }
        let endo = Endomorphism::new(m).unwrap();
        if !endo.is_nijenhuis().unwrap() {
            continue;
        }
        let graph = graph_bivector(&pi).unwrap();
        let dn = is_dirac_nijenhuis(&graph, &endo).unwrap().verdict();
        let pn = pn_check(&pi, &endo).unwrap();
        assert_eq!(dn, pn, "case {case}: generator check and PN check disagree");
    }
}
