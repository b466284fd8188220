//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use cross4d::constellation::{
    build_cross_qam, build_welti_class1, neighbor_stats, neighbor_stats_of, trim_high_power,
    Vector4D,
};
use cross4d::detection::LlrMode;
use cross4d::graymap::{verify_gray, BitSeq, CrossQamMapper, Labeling4D};
use cross4d::harness::{
    class1_trimmed, select_labeling, simulate_uncoded, summarize_constellations, Budget, CodedLink,
    ConstellationKind, LabelingKind,
};
use cross4d::ldpc::{build_h, decode_bp, Encoder, DEFAULT_SEED};
use cross4d::ofdm::{
    ccdf, ccdf_quantile, papr_db, papr_samples, random_symbols, DftsOfdm, WaveformConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn merge(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|p| p.ok);
    let detail = parts
        .iter()
        .map(|p| format!("{}{}", if p.ok { "" } else { "!! " }, p.detail))
        .collect::<Vec<_>>()
        .join("; ");
    check(ok, detail)
}

fn labeling(c: ConstellationKind, l: LabelingKind) -> Labeling4D {
    select_labeling(c, l, 1, 16).unwrap()
}

fn criterion_1_constellation_papr() -> Outcome {
    let start = Instant::now();
    let rows = summarize_constellations().unwrap();
    let elapsed = start.elapsed();
    let papr = |name: &str| rows.iter().find(|r| r.name == name).unwrap().papr_db;
    let mut parts = vec![];
    for (name, want, tol) in [
        ("12-cross-qam-4d", 0.969, 0.005),
        ("class1-trim128", 3.162, 0.005),
        ("16-qam", 2.553, 0.005),
    ] {
        let got = papr(name);
        parts.push(check(
            (got - want).abs() <= tol,
            format!("{name} {got:.4} dB (want {want}±{tol})"),
        ));
    }
    let dc = papr("dicyclic-128");
    parts.push(check(
        (dc - 3.0103).abs() <= 0.011,
        format!("dicyclic-128 {dc:.4} dB (want 3.0103±0.011)"),
    ));
    parts.push(check(
        elapsed < Duration::from_secs(1),
        format!("runtime {elapsed:.2?}"),
    ));
    merge(parts)
}

fn criterion_2_gray() -> Outcome {
    let start = Instant::now();
    let mut parts = vec![];
    for (m, size) in [(1, 128), (2, 2048), (3, 32768)] {
        let l = CrossQamMapper::new(m).unwrap().labeling();
        let r = verify_gray(&l);
        parts.push(check(
            l.len() == size && r.is_gray() && r.min_distance == 2.0,
            format!("m={m}: {} vectors, {r}", l.len()),
        ));
    }
    let elapsed = start.elapsed();
    parts.push(check(
        elapsed < Duration::from_secs(60),
        format!("runtime {elapsed:.2?}"),
    ));
    merge(parts)
}

fn criterion_3_round_trip() -> Outcome {
    let mut parts = vec![];
    for m in [1u32, 2] {
        let mapper = CrossQamMapper::new(m).unwrap();
        let k = mapper.k();
        let bad = (0..1u64 << k)
            .filter(|&b| {
                let b = BitSeq::new(b, k);
                mapper.demap(&mapper.map(b).unwrap()).ok() != Some(b)
            })
            .count();
        parts.push(check(
            bad == 0,
            format!("m={m}: {bad} of {} mismatches", 1u64 << k),
        ));
    }
    let mapper = CrossQamMapper::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bad = (0..1_000_000)
        .filter(|_| {
            let b = BitSeq::new(rng.gen::<u64>(), 15);
            mapper.demap(&mapper.map(b).unwrap()).ok() != Some(b)
        })
        .count();
    parts.push(check(
        bad == 0,
        format!("m=3: {bad} of 10^6 random mismatches"),
    ));
    merge(parts)
}

fn criterion_4_censuses() -> Outcome {
    let mut parts = vec![];

    // 12-QAM pairs not reached by the mapping.
    let used: HashSet<[i64; 4]> = CrossQamMapper::new(1)
        .unwrap()
        .enumerate()
        .iter()
        .map(|v| v.coords.map(|c| c as i64))
        .collect();
    let qam = build_cross_qam(1).unwrap();
    let mut excluded = 0;
    let mut excluded_all_inner = true;
    for a in &qam.points {
        for b in &qam.points {
            if !used.contains(&[a.x, a.y, b.x, b.y]) {
                excluded += 1;
                excluded_all_inner &= [a.x, a.y, b.x, b.y].iter().all(|c| c.abs() == 1);
            }
        }
    }
    parts.push(check(
        used.len() == 128 && excluded == 16 && excluded_all_inner,
        format!(
            "12-QAM: {} used, {excluded} excluded, all-inner={excluded_all_inner}",
            used.len()
        ),
    ));

    // Brute-force D4 ball census over [-3, 3]^4.
    let mut oracle = HashSet::new();
    let mut shells = [0usize; 7];
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            for c in -3i64..=3 {
                for d in -3i64..=3 {
                    let n = a * a + b * b + c * c + d * d;
                    if (a + b + c + d) % 2 == 0 && n <= 6 {
                        oracle.insert([a, b, c, d]);
                        shells[n as usize] += 1;
                    }
                }
            }
        }
    }
    let c1 = build_welti_class1();
    let built: HashSet<[i64; 4]> = c1
        .vectors
        .iter()
        .map(|v| v.coords.map(|c| c as i64))
        .collect();
    let shell_counts = (shells[0], shells[2], shells[4], shells[6]);
    parts.push(check(
        c1.len() == 145 && built == oracle && shell_counts == (1, 24, 24, 96),
        format!("Class I: {} points, shells {shell_counts:?}", c1.len()),
    ));

    let trimmed = trim_high_power(&c1, 128).unwrap();
    let kept: HashSet<[i64; 4]> = trimmed
        .vectors
        .iter()
        .map(|v| v.coords.map(|c| c as i64))
        .collect();
    let removed: Vec<Vector4D> = c1
        .vectors
        .iter()
        .filter(|v| !kept.contains(&v.coords.map(|c| c as i64)))
        .copied()
        .collect();
    let peaks_ok = removed.iter().all(|v| v.peak_symbol_power() == 5.0);
    parts.push(check(
        trimmed.len() == 128 && removed.len() == 17 && peaks_ok,
        format!(
            "trim: {} kept, {} removed, all removed at peak power 5 = {peaks_ok}",
            trimmed.len(),
            removed.len()
        ),
    ));
    merge(parts)
}

fn criterion_5_neighbors() -> Outcome {
    let twelve = neighbor_stats_of(&CrossQamMapper::new(1).unwrap().enumerate()).unwrap();
    let in_set = twelve.per_point_counts.iter().all(|c| [4, 5].contains(c));
    let c1 = neighbor_stats(&class1_trimmed()).unwrap();
    merge(vec![
        check(
            in_set,
            format!("12-QAM counts histogram {:?}", twelve.histogram()),
        ),
        check(c1.max == 24, format!("Class I max {}", c1.max)),
        check(
            (c1.avg - 13.58).abs() <= 0.7,
            format!("Class I average {:.4} (want 13.58±0.7)", c1.avg),
        ),
    ])
}

fn criterion_6_papr_12_subcarriers() -> Outcome {
    let wf = WaveformConfig::new(12, 2048, 4).unwrap();
    let n = 200_000;
    let q = |l: Labeling4D| {
        let s = papr_samples(&l.normalized(), &wf, n, 6).unwrap();
        ccdf_quantile(&s, 1e-3).unwrap()
    };
    let x12 = q(labeling(ConstellationKind::CrossQam, LabelingKind::Gray));
    let q16 = q(labeling(ConstellationKind::SquareQam, LabelingKind::Gray));
    let c1 = q(labeling(
        ConstellationKind::Class1Trim,
        LabelingKind::Progressive,
    ));
    let dc = q(labeling(
        ConstellationKind::Dicyclic,
        LabelingKind::Progressive,
    ));
    let gain16 = q16 - x12;
    let gain_c1 = c1 - x12;
    merge(vec![
        check(
            (0.15..=0.6).contains(&gain16),
            format!("12-QAM {x12:.3} dB vs 16-QAM {q16:.3} dB: gain {gain16:.3} dB"),
        ),
        check(
            (0.15..=0.6).contains(&gain_c1),
            format!("vs Class I {c1:.3} dB: gain {gain_c1:.3} dB (dicyclic {dc:.3} dB)"),
        ),
    ])
}

fn criterion_7_papr_single_carrier() -> Outcome {
    let wf = WaveformConfig::new(2048, 2048, 1).unwrap();
    let modem = DftsOfdm::new(wf).unwrap();
    let n = 20_000;
    let mut parts = vec![];
    let mut tails = vec![];
    for (c, l) in [
        (ConstellationKind::CrossQam, LabelingKind::Gray),
        (ConstellationKind::Class1Trim, LabelingKind::Progressive),
        (ConstellationKind::Dicyclic, LabelingKind::Progressive),
        (ConstellationKind::SquareQam, LabelingKind::Gray),
    ] {
        let lab = labeling(c, l).normalized();
        let mut gap = 0.0f64;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            rng.set_stream(i as u64);
            let syms = random_symbols(&lab, wf.m_used, &mut rng);
            let wave = papr_db(&modem.symbol(&syms).unwrap()).unwrap();
            gap = gap.max((wave - papr_db(&syms).unwrap()).abs());
            samples.push(wave);
        }
        parts.push(check(
            gap < 1e-9,
            format!("{}: max |waveform - symbol PAPR| {gap:.1e} dB", lab.name),
        ));
        if c == ConstellationKind::Dicyclic {
            let curve = ccdf(&samples, &[3.00, 3.02]).unwrap();
            let spread = samples
                .iter()
                .map(|s| (s - 10.0 * 2f64.log10()).abs())
                .fold(0.0, f64::max);
            parts.push(check(
                curve.prob == vec![1.0, 0.0] && spread < 1e-9,
                format!(
                    "dicyclic step at 3.0103 dB (spread {spread:.1e}, CCDF {:?})",
                    curve.prob
                ),
            ));
        }
        tails.push(ccdf_quantile(&samples, 1e-3).unwrap());
    }
    let adv = tails[1] - tails[0];
    parts.push(check(
        adv >= 1.5,
        format!(
            "12-QAM {:.3} dB vs Class I {:.3} dB at 1e-3: advantage {adv:.3} dB",
            tails[0], tails[1]
        ),
    ));
    merge(parts)
}

fn criterion_8_uncoded_ordering() -> Outcome {
    let budget = Budget {
        min_errors: 100,
        max_bits: 400_000_000,
        max_frames: 1,
    };
    let ber = |c, l| simulate_uncoded(&labeling(c, l), 12.0, budget, 8, 0).unwrap();
    let gray = ber(ConstellationKind::CrossQam, LabelingKind::Gray);
    let prog = ber(ConstellationKind::CrossQam, LabelingKind::Progressive);
    let dicy = ber(ConstellationKind::Dicyclic, LabelingKind::Progressive);
    let c1 = ber(ConstellationKind::Class1Trim, LabelingKind::Progressive);
    let enough = [&gray, &prog, &dicy, &c1].iter().all(|p| p.errors >= 100);
    merge(vec![
        check(
            enough,
            format!(
                "errors: gray {} prog {} dicyclic {} class1 {}",
                gray.errors, prog.errors, dicy.errors, c1.errors
            ),
        ),
        check(
            gray.ber < prog.ber && prog.ber < dicy.ber,
            format!(
                "gray {:.3e} < progressive {:.3e} < dicyclic {:.3e}",
                gray.ber, prog.ber, dicy.ber
            ),
        ),
        check(
            gray.ber <= c1.ber,
            format!(
                "gray {:.3e} <= Class I progressive {:.3e}",
                gray.ber, c1.ber
            ),
        ),
    ])
}

fn criterion_9_coded() -> Outcome {
    let h = build_h(DEFAULT_SEED).unwrap();
    let gray = CodedLink::new(
        h.clone(),
        &labeling(ConstellationKind::CrossQam, LabelingKind::Gray),
        50,
        LlrMode::Exact,
    );
    let prog = CodedLink::new(
        h,
        &labeling(ConstellationKind::CrossQam, LabelingKind::Progressive),
        50,
        LlrMode::Exact,
    );
    let budget = Budget {
        min_errors: 100,
        max_bits: u64::MAX,
        max_frames: 2000,
    };
    let mut found = None;
    for (i, snr) in (0..=16).map(|i| 2.0 + 0.25 * i as f64).enumerate() {
        let p = gray.simulate(snr, budget, 9, i).unwrap();
        if p.ber <= 1e-4 {
            found = Some((i, p));
            break;
        }
    }
    let Some((i, g)) = found else {
        return check(false, "Gray 12-QAM never reached BER 1e-4 on 2.0..6.0 dB");
    };
    let p = prog.simulate(g.ebn0_db, budget, 9, 100 + i).unwrap();
    let ratio = if g.ber > 0.0 {
        p.ber / g.ber
    } else {
        f64::INFINITY
    };
    check(
        p.ber >= 3.0 * g.ber && p.errors > 0,
        format!(
            "at {:.2} dB: Gray {:.3e} ({} frames), progressive {:.3e}, ratio {ratio:.1}",
            g.ebn0_db, g.ber, g.frames, p.ber
        ),
    )
}

fn criterion_10_ldpc() -> Outcome {
    let h = build_h(DEFAULT_SEED).unwrap();
    let weights_ok =
        h.column_weights().iter().all(|&w| w == 3) && h.row_weights().iter().all(|&w| w == 6);
    let cycles = h.four_cycles();
    let enc = Encoder::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut syndromes_ok = enc
        .encode(&vec![0; enc.k()])
        .unwrap()
        .iter()
        .all(|&b| b == 0);
    let mut fixed_ok = true;
    for _ in 0..20 {
        let info: Vec<u8> = (0..enc.k()).map(|_| rng.gen_range(0..2)).collect();
        let cw = enc.encode(&info).unwrap();
        syndromes_ok &= h.syndrome(&cw).iter().all(|&s| s == 0);
        let llrs: Vec<f64> = cw
            .iter()
            .map(|&b| if b == 0 { 25.0 } else { -25.0 })
            .collect();
        let out = decode_bp(&llrs, &h, 50);
        fixed_ok &= out.converged && out.iterations == 1 && out.bits == cw;
    }
    merge(vec![
        check(
            weights_ok && h.n() == 2394 && h.num_rows() == 1197,
            "weights (3, 6), n = 2394, 1197 checks",
        ),
        check(cycles == 0, format!("{cycles} 4-cycles")),
        check(
            syndromes_ok,
            format!(
                "zero syndrome after encode, rank {}, k = {}",
                h.rank(),
                enc.k()
            ),
        ),
        check(fixed_ok, "noiseless decode fixed point"),
    ])
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 constellation PAPR", criterion_1_constellation_papr),
        ("2 Gray property m=1,2,3", criterion_2_gray),
        ("3 map/demap round trip", criterion_3_round_trip),
        ("4 structure censuses", criterion_4_censuses),
        ("5 neighbor statistics", criterion_5_neighbors),
        (
            "6 PAPR CCDF, 12 of 2048 subcarriers",
            criterion_6_papr_12_subcarriers,
        ),
        (
            "7 PAPR CCDF, 2048 of 2048 subcarriers",
            criterion_7_papr_single_carrier,
        ),
        (
            "8 uncoded BER ordering at 12 dB",
            criterion_8_uncoded_ordering,
        ),
        ("9 coded BER Gray vs progressive", criterion_9_coded),
        ("10 LDPC structure", criterion_10_ldpc),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        println!(
            "[{}] criterion {name}: {} ({:.1?})",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
        if !o.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
