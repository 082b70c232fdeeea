//! Compare the data-parallel verification sweep against the always-sequential
//! fallback on the same randomized abstraction-soundness workload.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use refineplan::actions::AbstractStyle;
use refineplan::exec::{map_collect, map_collect_seq};
use refineplan::oracle::{check_abstraction, random_case};

const CASES: u64 = 24;
const SEED: u64 = 1;

fn workload(id: u64) -> usize {
    let case = random_case(AbstractStyle::IntraII, SEED, id);
    check_abstraction(&case).expect("generated case checks cleanly").len()
}

fn bench_verify(c: &mut Criterion) {
    let ids: Vec<u64> = (0..CASES).collect();
    let mut group = c.benchmark_group("soundness_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let failures: usize = map_collect(black_box(&ids), |&id| workload(id)).iter().sum();
            assert_eq!(failures, 0);
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let failures: usize =
                map_collect_seq(black_box(&ids), |&id| workload(id)).iter().sum();
            assert_eq!(failures, 0);
        })
    });
    group.finish();
}

criterion_group!(benches, bench_verify);
criterion_main!(benches);
