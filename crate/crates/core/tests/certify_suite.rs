use std::path::{Path, PathBuf};

use cu_lab::certify::{
    alpha_polynomial, build_h, certificate_names, load_certificates, load_certificates_unchecked, root_modulo_s,
    run_mutant, sample_monomials, verify_all, verify_alpha_elimination, verify_e1_identity, verify_h_divisibility,
    write_manifest, CertificateSet, CertifyError, ProbeConfig, S_DEGREE, S_X_DEGREE,
};
use cu_lab::cu_analysis::{cu_eval_raw, theta_scan};
use cu_lab::field2m::make_field;
use cu_lab::mpoly::{MPoly, Var};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("certificates")
}

fn shipped() -> CertificateSet {
    load_certificates(&data_dir()).unwrap()
}

fn copy_to_temp() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(data_dir()).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    dir
}

const BXYZ: [Var; 4] = [Var::Be, Var::X, Var::Y, Var::Z];

#[test]
fn shipped_certificates_pass_every_check() {
    let c = shipped();
    for r in verify_all(&c, ProbeConfig::default()) {
        assert!(r.passed(), "{}: {:?}", r.name, r.detail());
    }
}

#[test]
fn every_sampled_single_monomial_mutation_is_detected() {
    let c = shipped();
    let probe = ProbeConfig::default();
    let sample = sample_monomials(&c, 50, 7);
    assert_eq!(sample.len(), 50);
    for (file, mono) in sample {
        let m = run_mutant(&c, &file, mono, probe);
        assert!(m.killed_by.is_some(), "mutant of {file} survived");
    }
}

#[test]
fn targeted_mutations_fail_the_expected_check() {
    let c = shipped();
    let probe = ProbeConfig::default();

    let nf = &c.num_f;
    let mutated = c.with_replaced("f_num", nf.toggle(nf.monomials()[nf.len() / 2])).unwrap();
    assert!(!verify_e1_identity(&mutated).passed());

    let g = &c.g;
    let mutated = c.with_replaced("g", g.toggle(g.monomials()[0])).unwrap();
    assert!(!verify_alpha_elimination(&mutated, probe).passed());

    let mutated = c.with_replaced("a21", MPoly::zero()).unwrap();
    assert!(!verify_h_divisibility(&mutated, probe).passed());
}

#[test]
fn alpha_is_a_root_modulo_s() {
    let c = shipped();
    let probe = ProbeConfig::default();
    let p = alpha_polynomial(&c).unwrap();
    assert_eq!(p.degree_in(Var::Al), Some(7));
    assert!(root_modulo_s(&c, &p, probe).is_ok());

    let g = &c.g;
    let mutated = c.with_replaced("g", g.toggle(g.monomials()[g.len() - 1])).unwrap();
    let p = alpha_polynomial(&mutated).unwrap();
    assert!(root_modulo_s(&mutated, &p, probe).is_err());
}

#[test]
fn eliminant_is_deterministic_and_divisible() {
    let c = shipped();
    let h1 = build_h(&c).unwrap();
    let h2 = build_h(&c).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(c.h_eliminant().unwrap(), &h1);
    assert_eq!(h1.homogeneous_degree(&BXYZ).unwrap(), Some(107));
    assert!(!h1.variables().contains(&Var::Al));
    assert!(!h1.variables().contains(&Var::Ga));
    let q = h1.divide_exact(&c.s).unwrap().expect("S divides H");
    assert_eq!(q.mul(&c.s).unwrap(), h1);
}

#[test]
fn degree_ledger() {
    let c = shipped();
    assert_eq!(c.s.degree_in(Var::X), Some(S_X_DEGREE));
    assert_eq!(c.s.degree_in_vars(&BXYZ), Some(S_DEGREE));
    assert_eq!(c.s.homogeneous_degree(&BXYZ).unwrap(), Some(24));
    assert_eq!(c.a[0].degree_in(Var::U), Some(22));
    assert_eq!(c.h.var_valuation(Var::U).unwrap(), 5);
    for i in [13, 17, 19, 20] {
        assert!(c.a[i].is_zero());
    }
}

#[test]
fn tampered_file_is_rejected_by_the_manifest() {
    let dir = copy_to_temp();
    let path = dir.path().join("a05.poly");
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let victim = lines.iter().position(|l| !l.starts_with("poly") && !l.starts_with("vars") && *l != "end").unwrap();
    let edited: Vec<&str> = lines.iter().enumerate().filter(|&(i, _)| i != victim).map(|(_, l)| *l).collect();
    std::fs::write(&path, edited.join("\n") + "\n").unwrap();

    assert!(matches!(load_certificates(dir.path()), Err(CertifyError::ChecksumMismatch { file }) if file.contains("a05")));

    write_manifest(dir.path()).unwrap();
    let c = load_certificates(dir.path()).unwrap();
    assert!(verify_all(&c, ProbeConfig::default()).iter().any(|r| !r.passed()));
}

#[test]
fn missing_or_malformed_files_are_parse_errors() {
    let dir = copy_to_temp();
    std::fs::remove_file(dir.path().join("h.poly")).unwrap();
    assert!(matches!(load_certificates_unchecked(dir.path()), Err(CertifyError::Parse { .. })));

    let dir = copy_to_temp();
    std::fs::write(dir.path().join("a03.poly"), "poly a03\nvars: be Y Z u\nbe^2 Q^3\nend\n").unwrap();
    assert!(matches!(load_certificates_unchecked(dir.path()), Err(CertifyError::Parse { .. })));

    let dir = copy_to_temp();
    std::fs::write(dir.path().join("a03.poly"), "poly a03\nvars: be Y Z u\nbe^25\nend\n").unwrap();
    assert!(load_certificates_unchecked(dir.path()).is_err());
}

#[test]
fn certificate_names_cover_the_data_directory() {
    let names = certificate_names();
    assert_eq!(names.len(), 27);
    for n in names {
        assert!(data_dir().join(format!("{n}.poly")).exists(), "{n}");
    }
}

#[test]
fn theta_tuples_are_collisions() {
    let c = shipped();
    let mut cases = Vec::new();
    let f3 = make_field(3, None).unwrap();
    cases.extend((2..8).map(|u| (f3.clone(), u)));
    let f5 = make_field(5, None).unwrap();
    cases.extend([(f5.clone(), 2), (f5.clone(), 7), (f5.clone(), 0x1d)]);
    for (f, u) in cases {
        let tuples = theta_scan(&f, &f.element(u).unwrap(), &c).unwrap();
        assert!(!tuples.is_empty());
        for t in tuples {
            let p = [t.x, t.y, t.z];
            let d = [t.x ^ t.a, t.y ^ t.b, t.z ^ t.c];
            assert_eq!(cu_eval_raw(&f, u, p), cu_eval_raw(&f, u, d), "m = {}, u = {u:#x}, {t:?}", f.m());
        }
    }
}
