//! Random small instances in the file format, one shape per problem.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use valmat::random::{random_blocks, random_convex_table, random_laminar_family};

use crate::instance::{
    BlockSpec, ElementRef, FunctionSpec, GroundSpec, InstanceFile, MatroidSpec, MemberSpec, Model, Num, ProblemSpec,
    ValuationSpec,
};
use crate::{CliError, Problem};

fn refs(indices: impl IntoIterator<Item = usize>) -> Vec<ElementRef> {
    indices.into_iter().map(ElementRef::Index).collect()
}

fn ints(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<Num> {
    (0..n).map(|_| Num::Int(rng.gen_range(lo..=hi))).collect()
}

fn random_matroid(rng: &mut ChaCha8Rng, name: &str, n: usize) -> MatroidSpec {
    let name = name.to_string();
    match rng.gen_range(0..4) {
        0 => MatroidSpec::Uniform {
            name,
            rank: rng.gen_range(1..=n.min(3)),
        },
        1 => {
            let blocks = random_blocks(rng, n)
                .into_iter()
                .map(|b| BlockSpec {
                    capacity: rng.gen_range(1..=b.len()),
                    elements: refs(b.iter()),
                })
                .collect();
            MatroidSpec::Partition { name, blocks }
        }
        2 => {
            let vertices = rng.gen_range(2..=4);
            let edges = (0..n)
                .map(|_| {
                    let u = rng.gen_range(0..vertices);
                    let v = (u + rng.gen_range(1..vertices)) % vertices;
                    (u, v)
                })
                .collect();
            MatroidSpec::Graphic { name, vertices, edges }
        }
        _ => {
            let rows = rng.gen_range(1..=n.min(3));
            let columns = (0..n).map(|_| ints(rng, rows, -2, 2)).collect();
            MatroidSpec::Linear { name, columns }
        }
    }
}

fn modular(rng: &mut ChaCha8Rng, name: &str, matroid: &str, n: usize, lo: i64, hi: i64) -> ValuationSpec {
    ValuationSpec::ModularOnMatroid {
        name: name.into(),
        matroid: matroid.into(),
        weights: ints(rng, n, lo, hi),
    }
}

/// A laminar convex function on `[0, cap]^n` restricted to `Σx = rank`.
fn m_convex(rng: &mut ChaCha8Rng, name: &str, n: usize, cap: i64, rank: i64) -> FunctionSpec {
    let members = random_laminar_family(rng, n)
        .into_iter()
        .map(|m| {
            let table = random_convex_table(rng, m.len() * cap as usize + 1, 3);
            MemberSpec {
                elements: refs(m.iter()),
                start: table.start(),
                values: table.values().iter().map(Num::from_rational).collect(),
            }
        })
        .collect();
    FunctionSpec::Laminar {
        name: name.into(),
        lower: vec![0; n],
        upper: vec![cap; n],
        members,
        rank: Some(rank),
    }
}

/// Nondecreasing convex delays `a + b x + c x(x-1)/2` for `x = 0..=players`.
fn delays(rng: &mut ChaCha8Rng, players: usize) -> Vec<Num> {
    let (a, b, c) = (rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(0..=2));
    (0..=players as i64)
        .map(|x| Num::Int(a + b * x + c * x * (x - 1) / 2))
        .collect()
}

fn rank_of(file: &InstanceFile, matroid: &str) -> Result<usize, CliError> {
    Ok(Model::build(file)?.matroid(matroid)?.rank())
}

/// A random instance of `problem` over `size` elements.
pub fn generate(problem: Problem, seed: u64, size: usize) -> Result<InstanceFile, CliError> {
    if !(1..=8).contains(&size) {
        return Err(CliError::invalid("size", "generated instances have 1 to 8 elements"));
    }
    let n = size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut file = InstanceFile {
        ground: GroundSpec {
            size: None,
            labels: Some((0..n).map(|i| format!("e{i}")).collect()),
        },
        ..InstanceFile::default()
    };
    let mut spec = ProblemSpec::default();
    match problem {
        Problem::VGeqK | Problem::VEqK | Problem::VLeqK | Problem::VC | Problem::WEqKLpt | Problem::Copic => {
            file.matroids = vec![random_matroid(&mut rng, "m1", n), random_matroid(&mut rng, "m2", n)];
            let r = rank_of(&file, "m1")?.min(rank_of(&file, "m2")?);
            match problem {
                Problem::WEqKLpt | Problem::Copic => {
                    spec.matroids = vec!["m1".into(), "m2".into()];
                    spec.w1 = Some(ints(&mut rng, n, -9, 9));
                    spec.w2 = Some(ints(&mut rng, n, -9, 9));
                    if problem == Problem::Copic {
                        let (lo, hi) = if rng.gen_bool(0.5) { (0, 6) } else { (-6, 0) };
                        spec.q = Some(ints(&mut rng, n, lo, hi));
                    } else {
                        spec.k = Some(rng.gen_range(0..=r) as i64);
                    }
                }
                _ => {
                    file.valuations = vec![
                        modular(&mut rng, "a", "m1", n, -9, 9),
                        modular(&mut rng, "b", "m2", n, -9, 9),
                    ];
                    spec.valuations = vec!["a".into(), "b".into()];
                    if problem == Problem::VC {
                        spec.c = Some(
                            (0..=n)
                                .map(|_| {
                                    if rng.gen_bool(0.2) {
                                        Num::Text("inf".into())
                                    } else {
                                        Num::Int(rng.gen_range(-5..=5))
                                    }
                                })
                                .collect(),
                        );
                    } else {
                        spec.k = Some(rng.gen_range(0..=r) as i64);
                    }
                }
            }
        }
        Problem::VIn | Problem::VNW | Problem::Congestion => {
            let players = rng.gen_range(2..=3);
            let lo = if problem == Problem::Congestion { 0 } else { -9 };
            for i in 0..players {
                let m = format!("m{}", i + 1);
                let v = format!("p{}", i + 1);
                file.matroids.push(random_matroid(&mut rng, &m, n));
                file.valuations.push(modular(&mut rng, &v, &m, n, lo, 9));
                spec.valuations.push(v);
            }
            match problem {
                Problem::VIn => {
                    file.matroids.push(random_matroid(&mut rng, "indep", n));
                    spec.independence = Some("indep".into());
                }
                Problem::VNW => spec.w = Some(ints(&mut rng, n, 0, 6)),
                _ => spec.delays = Some((0..n).map(|_| delays(&mut rng, players)).collect()),
            }
        }
        Problem::MGeqKW => {
            let cap = 2;
            let r1 = rng.gen_range(0..=cap * n as i64);
            let r2 = rng.gen_range(0..=cap * n as i64);
            file.functions = vec![
                m_convex(&mut rng, "f1", n, cap, r1),
                m_convex(&mut rng, "f2", n, cap, r2),
            ];
            spec.functions = vec!["f1".into(), "f2".into()];
            spec.k = Some(rng.gen_range(0..=r1.min(r2)));
            spec.w = Some(ints(&mut rng, n, -4, 0));
        }
        Problem::RecoverableRobust => {
            file.matroids = vec![random_matroid(&mut rng, "m", n)];
            file.valuations = vec![modular(&mut rng, "first", "m", n, -9, 9)];
            spec.valuations = vec!["first".into()];
            let lower: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
            spec.upper = Some(lower.iter().map(|l| Num::Int(l + rng.gen_range(0..=5))).collect());
            spec.lower = Some(lower.into_iter().map(Num::Int).collect());
            spec.k = Some(rng.gen_range(0..=rank_of(&file, "m")?) as i64);
        }
    }
    file.problem = spec;
    Ok(file)
}
