//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use breptok::constraints::{detect_constraints, DEFAULT_AXIS_TOL_DEG, DEFAULT_HULL_TOL};
use breptok::corpus::{gen_corpus, gen_cylinder, gen_plate_corpus};
use breptok::document::BRepDocument;
use breptok::fsq::{fsq_dequantize, fsq_quantize, FsqLevels};
use breptok::geometry::{
    canonical_face, canonicalize_uv_origin, compute_aabb, dist2, Aabb, EdgeGrid, FaceFlips,
    FaceGrid, Point3, PointGrid,
};
use breptok::latent::{LatentEncoder, MomentCodec};
use breptok::metrics::{chamfer, compute_cov_mmd_jsd, novel_unique, sample_indexed, solid_key};
use breptok::pipeline::{detokenize, roundtrip, tokenize, TokenizeOptions};
use breptok::tokens::coords::HALF_BIN;
use breptok::tokens::{autocomplete_split, parse_stream, ComplexityClass, DecodeMode, Token, TokenKind};
use breptok::topology::{
    assign_window_tags, traversal_plan, BRepGraph, Edge, Face, FaceRef, RefTag, TraversalPlan,
    WindowStride,
};
use breptok::validity::{check_validity, DEFAULT_GAP_TOL};

type Outcome = std::result::Result<String, String>;

const CORPUS_SIZE: usize = 1000;
const CORPUS_SEED: u64 = 20240;

fn corpus() -> &'static [(BRepDocument, BRepGraph)] {
    static C: OnceLock<Vec<(BRepDocument, BRepGraph)>> = OnceLock::new();
    C.get_or_init(|| {
        gen_corpus(CORPUS_SIZE, CORPUS_SEED)
            .expect("corpus generation")
            .into_iter()
            .map(|d| {
                let g = d.to_graph().expect("generated document");
                (d, g)
            })
            .collect()
    })
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1_and_2() -> (Outcome, Outcome) {
    let c = corpus();
    let codec = MomentCodec::new();
    let mut classes = [0usize; 3];
    for (d, _) in c {
        match d.labels.as_ref().and_then(|l| l.complexity) {
            Some(ComplexityClass::Easy) => classes[0] += 1,
            Some(ComplexityClass::Medium) => classes[1] += 1,
            Some(ComplexityClass::Hard) => classes[2] += 1,
            _ => {}
        }
    }
    let max_faces = c.iter().map(|(_, g)| g.face_count()).max().unwrap_or(0);
    let start = Instant::now();
    let results: Vec<_> = c
        .par_iter()
        .map(|(_, g)| {
            let opts = TokenizeOptions::default();
            let report = roundtrip(g, &codec, &opts)?;
            let t = tokenize(g, &codec, &opts)?;
            let d = detokenize(&t.stream, &codec, DecodeMode::Unconditional, opts.stride)?;
            let counts = d.graph.face_count() == g.face_count() && d.graph.edge_count() == g.edge_count();
            Ok::<_, breptok::Error>((report, counts))
        })
        .collect();
    let elapsed = start.elapsed();
    let mut topo_ok = 0;
    let mut place_ok = 0;
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for r in &results {
        match r {
            Ok((rep, counts)) => {
                if rep.topology_ok && *counts {
                    topo_ok += 1;
                }
                if rep.max_placement_error <= HALF_BIN {
                    place_ok += 1;
                }
                worst = worst.max(rep.max_placement_error);
            }
            Err(_) => errors += 1,
        }
    }
    let n = c.len();
    let spans = classes.iter().all(|&k| k > 0) && max_faces <= 100;
    let one = ensure(
        n >= 1000 && spans && topo_ok == n && elapsed < Duration::from_secs(120),
        format!(
            "{topo_ok}/{n} isomorphic (easy/medium/hard = {}/{}/{}, max faces {max_faces}, errors {errors}), {:.1}s",
            classes[0],
            classes[1],
            classes[2],
            elapsed.as_secs_f64()
        ),
    );
    let two = ensure(
        place_ok == n,
        format!("{place_ok}/{n} within 1/1024, worst corner error {worst:.3e}"),
    );
    (one, two)
}

fn criterion_3() -> Outcome {
    let levels = FsqLevels::default();
    let size = levels.codebook_size();
    let mut sweep_ok = 0;
    for i in 0..size {
        let v = fsq_dequantize(i, &levels).map_err(|e| e.to_string())?;
        if fsq_quantize(&v, &levels).map_err(|e| e.to_string())?.index == i {
            sweep_ok += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut used = vec![false; size];
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100_000 {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let q = fsq_quantize(&v, &levels).map_err(|e| e.to_string())?;
        used[q.index] = true;
        for ((&x, &s), &l) in v.iter().zip(&q.snapped).zip(levels.levels()) {
            worst_ratio = worst_ratio.max((x - s).abs() * (l - 1) as f64);
        }
    }
    let usage = used.iter().filter(|&&u| u).count();
    ensure(
        size == 1000 && sweep_ok == size && worst_ratio <= 1.0 && usage == size,
        format!(
            "sweep {sweep_ok}/{size}, worst snap error {worst_ratio:.4} x 1/(L-1), usage {}%",
            100 * usage / size
        ),
    )
}

fn tags_in_order(p: &TraversalPlan) -> Vec<(usize, usize, RefTag)> {
    p.levels
        .iter()
        .flatten()
        .flat_map(|f| f.edges.iter().map(move |e| (f.face, e.edge, e.tag.expect("tagged"))))
        .collect()
}

fn criterion_4() -> Outcome {
    let g = gen_cylinder(1.0, 2.0)
        .and_then(|d| d.to_graph())
        .map_err(|e| e.to_string())?;
    let opts = TokenizeOptions {
        meta: Some(ComplexityClass::Easy),
        ..Default::default()
    };
    let t = tokenize(&g, &MomentCodec::new(), &opts).map_err(|e| e.to_string())?;
    let levels: Vec<Vec<usize>> = t
        .plan
        .levels
        .iter()
        .map(|l| l.iter().map(|f| f.face).collect())
        .collect();
    let got = tags_in_order(&t.plan);
    // owner, other, tag: E1,0 E2,0 E2,1 E*2,1 E3,1 E3,2
    let w = RefTag::Window;
    let want = [(1, 0, w(0)), (2, 0, w(0)), (2, 1, w(1)), (2, 1, w(1)), (3, 1, w(0)), (3, 2, w(1))];
    let other = |e: usize, owner: usize| {
        g.edges[e]
            .faces
            .iter()
            .filter_map(|f| f.face())
            .find(|&f| f != owner)
            .unwrap_or(owner)
    };
    let edges_ok = got.len() == want.len()
        && got
            .iter()
            .zip(&want)
            .all(|(&(owner, e, tag), &(wo, wother, wtag))| owner == wo && other(e, owner) == wother && tag == wtag);
    let tag_tokens: Vec<String> = t
        .stream
        .iter()
        .filter_map(|&id| Token::from_id(id))
        .filter(|tok| tok.kind() == TokenKind::Ref)
        .map(|tok| tok.describe())
        .collect();
    ensure(
        levels == vec![vec![0], vec![1, 2], vec![3]] && edges_ok && t.stream.len() == 108,
        format!(
            "levels {levels:?}, references {}, {} tokens",
            tag_tokens.join(" "),
            t.stream.len()
        ),
    )
}

fn random_multigraph(rng: &mut ChaCha8Rng) -> BRepGraph {
    let n = rng.random_range(1..=8);
    let faces: Vec<Face> = (0..n)
        .map(|_| {
            let lo: Point3 = [rng.random_range(-1.0..0.5), rng.random_range(-1.0..0.5), rng.random_range(-1.0..0.5)];
            let ext = [rng.random_range(0.01..0.5), rng.random_range(0.01..0.5)];
            let grid = FaceGrid::from_fn(Some(true), |i, j| {
                [lo[0] + ext[0] * i as f64 / 31.0, lo[1] + ext[1] * j as f64 / 31.0, lo[2]]
            })
            .expect("grid");
            Face::new(grid).expect("face")
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|k| (rng.random_range(0..k), k)).collect();
    for _ in 0..rng.random_range(0..=2 * n) {
        pairs.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            let (p, q) = (
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            );
            let grid = EdgeGrid::from_fn(|k| {
                let t = k as f64 / 31.0;
                [p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t, p[2] + (q[2] - p[2]) * t]
            })
            .expect("edge grid");
            Edge::between(grid, a, b).expect("edge")
        })
        .collect();
    BRepGraph::new(faces, edges).expect("graph")
}

/// Tags recomputed from scratch for every edge: the window is every face
/// already in the stream whose level is at least the window's first level.
fn oracle_tags(g: &BRepGraph, plan: &TraversalPlan, stride: WindowStride) -> Option<Vec<RefTag>> {
    let n = g.face_count();
    // levels by breadth-first distance from the plan's first face
    let start = plan.levels[0][0].face;
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    for round in 0..n {
        for e in &g.edges {
            let (a, b) = (e.faces[0].face()?, e.faces[1].face()?);
            for (x, y) in [(a, b), (b, a)] {
                if dist[x] == round && dist[y] == usize::MAX {
                    dist[y] = round + 1;
                }
            }
        }
    }
    let stream: Vec<usize> = plan.levels.iter().flatten().map(|f| f.face).collect();
    for (l, level) in plan.levels.iter().enumerate() {
        if level.iter().any(|f| dist[f.face] != l) {
            return None;
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![0; g.edge_count()];
    for (pos, entry) in plan.levels.iter().flatten().enumerate() {
        let l = dist[entry.face];
        let first = match (stride, l) {
            (_, 0) => 0,
            (WindowStride::One, l) => l - 1,
            (WindowStride::Two, l) => (l - 1) - (l - 1) % 2,
        };
        let window: Vec<usize> = stream[..=pos].iter().copied().filter(|&f| dist[f] >= first).collect();
        for e in &entry.edges {
            seen[e.edge] += 1;
            let ends: Vec<usize> = g.edges[e.edge].faces.iter().filter_map(|f| f.face()).collect();
            let other = if ends[0] == entry.face { ends[1] } else { ends[0] };
            let t = window.iter().position(|&f| f == other)?;
            out.push(RefTag::Window(t as u16));
        }
    }
    seen.iter().all(|&s| s == 1).then_some(out)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = 0;
    let total = 500;
    for _ in 0..total {
        let g = random_multigraph(&mut rng);
        let mut agree = true;
        for stride in [WindowStride::One, WindowStride::Two] {
            let got = traversal_plan(&g)
                .and_then(|p| assign_window_tags(&p, stride))
                .ok()
                .map(|p| {
                    let tags = tags_in_order(&p).into_iter().map(|(_, _, t)| t).collect::<Vec<_>>();
                    (oracle_tags(&g, &p, stride), tags)
                });
            agree &= matches!(got, Some((Some(want), tags)) if want == tags);
        }
        ok += agree as usize;
    }
    ensure(ok == total, format!("{ok}/{total} graphs agree with the oracle under both strides"))
}

fn criterion_6() -> Outcome {
    let codec = MomentCodec::new();
    let total = 10_000;
    let ok: usize = (0..total as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            rng.set_stream(i);
            let orient = [None, Some(true), Some(false)][rng.random_range(0..3)];
            let grid = FaceGrid::from_fn(orient, |_, _| {
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
            })
            .expect("grid");
            let (base, _) = canonicalize_uv_origin(&grid);
            let base_code = canonical_face(&grid).map(|c| codec.encode_face(&c).codes);
            let same = FaceFlips::ALL.iter().all(|&f| {
                let flipped = grid.flipped(f);
                let (c, _) = canonicalize_uv_origin(&flipped);
                let bits = |g: &FaceGrid| g.points().iter().flat_map(|p| p.map(f64::to_bits)).collect::<Vec<_>>();
                let code = canonical_face(&flipped).map(|c| codec.encode_face(&c).codes);
                bits(&c) == bits(&base)
                    && c.orientation_out == base.orientation_out
                    && matches!((&code, &base_code), (Ok(a), Ok(b)) if a == b)
            });
            same as usize
        })
        .sum();
    ensure(ok == total, format!("{ok}/{total} grids identical across all 4 flips"))
}

fn criterion_7() -> Outcome {
    let c = corpus();
    let codec = MomentCodec::new();
    let total = 200;
    let results: Vec<std::result::Result<(), String>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let (_, g) = &c[(i * 5) % c.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            rng.set_stream(i as u64);
            let n = g.face_count();
            let k = rng.random_range(1..=n.min(12));
            let mut faces: Vec<usize> = (0..n).collect();
            for a in 0..k {
                let b = rng.random_range(a..n);
                faces.swap(a, b);
            }
            faces.truncate(k);
            let b = g.bbox().ok_or("empty")?;
            let ext = b.max_extent();
            let pad = |r: &mut ChaCha8Rng| r.random_range(0.0..0.2) * ext;
            let domain = Aabb {
                min: [b.min[0] - pad(&mut rng), b.min[1] - pad(&mut rng), b.min[2] - pad(&mut rng)],
                max: [b.max[0] + pad(&mut rng), b.max[1] + pad(&mut rng), b.max[2] + pad(&mut rng)],
            };
            let stride = if i % 2 == 0 { WindowStride::One } else { WindowStride::Two };
            let meta = (i % 3 == 0).then_some(ComplexityClass::Random);
            let split = autocomplete_split(g, &faces, &domain, &codec, stride, meta).map_err(|e| e.to_string())?;
            let d = detokenize(&split.joined(), &codec, DecodeMode::Autocomplete, stride).map_err(|e| e.to_string())?;
            let h = d.decoded.header_len;
            let same_header = split.prefix[..h] == split.joined()[..h];
            if same_header && d.decoded.level_tokens(0) == split.prefix[h..] {
                Ok(())
            } else {
                Err(format!("set {i}: user level differs"))
            }
        })
        .collect();
    let ok = results.iter().filter(|r| r.is_ok()).count();
    let first = results.iter().find_map(|r| r.as_ref().err().cloned()).unwrap_or_default();
    ensure(ok == total, format!("{ok}/{total} conditioning sets preserved verbatim {first}"))
}

fn criterion_8() -> Outcome {
    let c = corpus();
    let checks: Vec<[bool; 4]> = c
        .par_iter()
        .enumerate()
        .map(|(i, (_, g))| {
            let clean = check_validity(g, DEFAULT_GAP_TOL).is_manifold_closed;
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            rng.set_stream(i as u64);
            let f = rng.random_range(0..g.face_count());

            // missing face: drop it and its edge slots
            let mut missing = g.clone();
            missing.faces.remove(f);
            for e in &mut missing.edges {
                e.faces.retain(|r| *r != FaceRef::Face(f));
                for r in &mut e.faces {
                    if let FaceRef::Face(x) = r {
                        if *x > f {
                            *x -= 1;
                        }
                    }
                }
            }
            let r = check_validity(&missing, DEFAULT_GAP_TOL);
            let missing_ok = !r.is_manifold_closed && !r.edge_incidence_violations.is_empty();

            // translated face
            let ext = g.bbox().map(|b| b.max_extent()).unwrap_or(1.0);
            let d = 0.05 * ext / 3f64.sqrt();
            let mut moved = g.clone();
            moved.faces[f] = Face::new(moved.faces[f].grid.map_points(|p| [p[0] + d, p[1] + d, p[2] + d])).expect("face");
            let r = check_validity(&moved, DEFAULT_GAP_TOL);
            let moved_ok = !r.is_manifold_closed && r.geometric_gap_violations.iter().any(|v| v.face == f);

            // dangling edge
            let e = rng.random_range(0..g.edge_count());
            let mut dangling = g.clone();
            dangling.edges[e].faces[1] = FaceRef::Unassigned;
            let r = check_validity(&dangling, DEFAULT_GAP_TOL);
            let dangling_ok = !r.is_manifold_closed && r.dangling_edges == vec![e];
            [clean, missing_ok, moved_ok, dangling_ok]
        })
        .collect();
    let n = c.len();
    let count = |k: usize| checks.iter().filter(|c| c[k]).count();
    let (a, b, m, d) = (count(0), count(1), count(2), count(3));
    ensure(
        a == n && b == n && m == n && d == n,
        format!("clean {a}/{n}, missing face {b}/{n}, translated face {m}/{n}, dangling edge {d}/{n}"),
    )
}

fn criterion_9() -> Outcome {
    let plates = gen_plate_corpus(120, 9).map_err(|e| e.to_string())?;
    let mut holes = [0usize; 7];
    let ok = plates
        .iter()
        .filter(|doc| {
            let l = doc.labels.clone().unwrap_or_default();
            holes[l.bolt_holes.len() / 2] += 1;
            let Ok(g) = doc.to_graph() else { return false };
            let c = detect_constraints(&g, DEFAULT_HULL_TOL, DEFAULT_AXIS_TOL_DEG);
            c.bolt_holes.faces == l.bolt_holes && c.hull_planes == l.hull_planes
        })
        .count();
    let n = plates.len();
    let spread = (1..=6).all(|k| holes[k] > 0);
    ensure(
        ok == n && n >= 100 && spread,
        format!("{ok}/{n} plates exact (hole counts 1..6: {:?})", &holes[1..]),
    )
}

fn criterion_10() -> Outcome {
    let c = corpus();
    let sets: Vec<Vec<Point3>> = (0..20)
        .map(|i| {
            let (g, _) = c[i * 7].1.normalized().expect("normalized");
            sample_indexed(&g, 500, 10, i as u64).expect("samples")
        })
        .collect();
    let s = compute_cov_mmd_jsd(&sets, &sets).map_err(|e| e.to_string())?;
    let identity = (s.cov - 100.0).abs() <= 1e-12 && s.mmd.abs() <= 1e-12 && s.jsd.abs() <= 1e-12;

    let brute = |a: &[Point3], b: &[Point3]| {
        let one = |x: &[Point3], y: &[Point3]| {
            x.iter()
                .map(|&p| y.iter().map(|&q| dist2(p, q)).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
                / x.len() as f64
        };
        one(a, b) + one(b, a)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut exact = 0;
    let pairs = 2000;
    for _ in 0..pairs {
        let cloud = |r: &mut ChaCha8Rng| -> Vec<Point3> {
            (0..r.random_range(1..=64))
                .map(|_| [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)])
                .collect()
        };
        let a = cloud(&mut rng);
        let b = if rng.random_bool(0.3) {
            let mut p = a.clone();
            p.reverse();
            p
        } else {
            cloud(&mut rng)
        };
        exact += (chamfer(&a, &b) == brute(&a, &b)) as usize;
    }

    let graphs: Vec<BRepGraph> = c[..10].iter().map(|(_, g)| g.clone()).collect();
    let mut dup = graphs.clone();
    dup.push(graphs[0].clone());
    let n = dup.len() as f64;
    let (_, unique) = novel_unique(&dup, &graphs);
    let (novel, _) = novel_unique(&graphs[..5], &graphs[5..]);
    let boxed = breptok::corpus::gen_box([1.0, 2.0, 3.0]).and_then(|d| d.to_graph()).map_err(|e| e.to_string())?;
    let nudged = boxed.map_points(|p| [p[0] + 1e-6, p[1] - 1e-6, p[2] + 1e-6]).map_err(|e| e.to_string())?;
    let same_key = solid_key(&boxed) == solid_key(&nudged);
    let degenerate = unique == 100.0 * (n - 1.0) / n && novel == 100.0 && same_key;
    ensure(
        identity && exact == pairs && degenerate,
        format!(
            "self-comparison ({}, {}, {}), chamfer exact {exact}/{pairs}, unique {unique:.4} novel {novel} perturbed key equal {same_key}",
            s.cov, s.mmd, s.jsd
        ),
    )
}

fn mutate(base: &[u16], rng: &mut ChaCha8Rng) -> Vec<u16> {
    let mut t = base.to_vec();
    match rng.random_range(0..6) {
        0 => {
            let n = rng.random_range(0..=64);
            return (0..n).map(|_| rng.random_range(0..3300)).collect();
        }
        1 => t.truncate(rng.random_range(0..t.len())),
        2 => {
            for _ in 0..rng.random_range(1..=4) {
                let k = rng.random_range(0..t.len());
                t[k] = rng.random_range(0..u16::MAX);
            }
        }
        3 => {
            // swap a token for one of another kind
            let k = rng.random_range(0..t.len());
            let kind = Token::from_id(t[k]).map(|x| x.kind());
            loop {
                let id = rng.random_range(0..3237u16);
                if Token::from_id(id).map(|x| x.kind()) != kind {
                    t[k] = id;
                    break;
                }
            }
        }
        4 => {
            let a = rng.random_range(0..t.len());
            let b = rng.random_range(0..t.len());
            t.swap(a, b);
        }
        _ => {
            let k = rng.random_range(0..t.len());
            if rng.random_bool(0.5) {
                t.remove(k);
            } else {
                t.insert(k, rng.random_range(0..3237));
            }
        }
    }
    t
}

fn criterion_11() -> Outcome {
    let c = corpus();
    let codec = MomentCodec::new();
    let mut bases: Vec<Vec<u16>> = Vec::new();
    for (i, (_, g)) in c.iter().enumerate().filter(|(i, _)| i % 25 == 0) {
        let opts = TokenizeOptions {
            meta: (i % 2 == 0).then(|| ComplexityClass::from_face_count(g.face_count())),
            ..Default::default()
        };
        bases.push(tokenize(g, &codec, &opts).map_err(|e| e.to_string())?.stream.tokens);
    }
    let total: u64 = 1_000_000;
    let chunks = 1000u64;
    let stats: Vec<(u64, u64, u64, Duration)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            rng.set_stream(chunk);
            let (mut errors, mut parsed, mut crashes) = (0, 0, 0);
            let mut slowest = Duration::ZERO;
            for _ in 0..total / chunks {
                let base = &bases[rng.random_range(0..bases.len())];
                let t = mutate(base, &mut rng);
                let mode = if rng.random_bool(0.5) { DecodeMode::Unconditional } else { DecodeMode::Autocomplete };
                let stride = if rng.random_bool(0.5) { WindowStride::One } else { WindowStride::Two };
                let start = Instant::now();
                let r = catch_unwind(AssertUnwindSafe(|| match parse_stream(&t, mode, stride) {
                    Ok(ds) => ds.to_graph(&codec).is_ok(),
                    Err(e) => {
                        let _ = e.position();
                        false
                    }
                }));
                slowest = slowest.max(start.elapsed());
                match r {
                    Ok(true) => parsed += 1,
                    Ok(false) => errors += 1,
                    Err(_) => crashes += 1,
                }
            }
            (errors, parsed, crashes, slowest)
        })
        .collect();
    let errors: u64 = stats.iter().map(|s| s.0).sum();
    let parsed: u64 = stats.iter().map(|s| s.1).sum();
    let crashes: u64 = stats.iter().map(|s| s.2).sum();
    let slowest = stats.iter().map(|s| s.3).max().unwrap_or_default();
    ensure(
        crashes == 0 && slowest < Duration::from_secs(1) && errors + parsed == total,
        format!(
            "{total} streams: {errors} structured errors, {parsed} valid, {crashes} crashes, slowest {:.2} ms",
            slowest.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_12() -> Outcome {
    let c = corpus();
    let codec = MomentCodec::new();
    let rmses: Vec<f64> = c
        .par_iter()
        .flat_map_iter(|(_, g)| g.faces.iter().map(|f| f.grid.clone()).collect::<Vec<_>>())
        .map(|grid| {
            let cf = canonical_face(&grid).expect("canonical");
            let b = compute_aabb(&cf.grid).expect("box");
            let rec = codec.decode_face(&codec.encode_face(&cf), &b).expect("decode");
            let s: f64 = rec.points().iter().zip(cf.grid.points()).map(|(p, q)| dist2(*p, *q)).sum();
            (s / rec.points().len() as f64).sqrt()
        })
        .collect();
    let worst = rmses.iter().copied().fold(0.0, f64::max);
    let mean = rmses.iter().sum::<f64>() / rmses.len() as f64;
    ensure(
        worst <= 0.15,
        format!("{} faces, worst RMSE {worst:.4}, mean {mean:.4}", rmses.len()),
    )
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: &str, what: &str, o: Outcome| {
        let (tag, detail) = match o {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {n:>2} {what}: {detail}");
    };
    let guard = |f: &dyn Fn() -> Outcome| {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))
    };
    let (one, two) = catch_unwind(criterion_1_and_2)
        .unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
    report("1", "round-trip topology", one);
    report("2", "round-trip placement", two);
    report("3", "FSQ exactness", guard(&criterion_3));
    report("4", "split-cylinder golden stream", guard(&criterion_4));
    report("5", "window oracle", guard(&criterion_5));
    report("6", "UV-origin invariance", guard(&criterion_6));
    report("7", "autocomplete preservation", guard(&criterion_7));
    report("8", "validity proxy", guard(&criterion_8));
    report("9", "constraint detection", guard(&criterion_9));
    report("10", "metrics sanity", guard(&criterion_10));
    report("11", "parser robustness", guard(&criterion_11));
    report("12", "reference encoder fidelity", guard(&criterion_12));
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
