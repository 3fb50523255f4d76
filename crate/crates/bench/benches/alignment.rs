use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use storyalign::dataio::{decode_features, encode_features};
use storyalign::sim::cosine_similarity;
use storyalign::{drop_dtw_align, dtw_align, DropCosts, FeatureMatrix, Role, SimilarityMatrix};

fn similarity(rows: usize, cols: usize, seed: u64) -> SimilarityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..rows * cols)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    SimilarityMatrix::new(rows, cols, values).unwrap()
}

fn features(count: usize, dim: usize, role: Role, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count * dim)
        .map(|_| rng.gen_range(-1.0f32..1.0))
        .collect();
    FeatureMatrix::new(count, dim, values, role).unwrap()
}

fn alignment(c: &mut Criterion) {
    let drops = DropCosts::new(0.6, 0.6).unwrap();
    let mut group = c.benchmark_group("align");
    // Clips outnumber sentences roughly four to one in story videos.
    for &(clips, sentences) in &[(40, 10), (200, 50), (800, 200)] {
        let sim = similarity(clips, sentences, 7);
        let label = format!("{clips}x{sentences}");
        group.bench_with_input(BenchmarkId::new("drop_dtw", &label), &sim, |b, sim| {
            b.iter(|| drop_dtw_align(black_box(sim), drops))
        });
        group.bench_with_input(BenchmarkId::new("dtw", &label), &sim, |b, sim| {
            b.iter(|| dtw_align(black_box(sim)))
        });
    }
    group.finish();
}

fn similarity_and_io(c: &mut Criterion) {
    let clips = features(400, 256, Role::Clip, 1);
    let sentences = features(100, 256, Role::Sentence, 2);
    c.bench_function("cosine_similarity 400x100 d256", |b| {
        b.iter(|| cosine_similarity(black_box(&clips), black_box(&sentences)).unwrap())
    });

    let bytes = encode_features(&clips);
    c.bench_function("decode_features 400x256", |b| {
        b.iter(|| decode_features(black_box(&bytes), Role::Clip).unwrap())
    });
}

criterion_group!(benches, alignment, similarity_and_io);
criterion_main!(benches);
