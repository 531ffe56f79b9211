"""Seeded synthetic corpus generator: themed keyword clusters at desk scale.

Records are split across ten themed clusters with mostly disjoint
vocabulary, so mock-embedding similarity, projection, and meta views show
real structure without any proprietary data. Output is a pure function of
(n, seed): rerunning produces byte-identical files.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import PaperRecord, normalize_title, write_corpus
from .embeddings import MOCK, EmbeddingSpace, compose_document_text, embed_mock, write_vectors
from .errors import ValidationError

DEFAULT_DIMENSION = 64

CORPUS_FILENAME = "corpus.jsonl"


def embeddings_filename(space_name: str) -> str:
    return f"embeddings-{space_name}.jsonl"


@dataclass(frozen=True)
class _Theme:
    name: str
    methods: tuple[str, ...]
    topics: tuple[str, ...]
    keywords: tuple[str, ...]
    venues: tuple[str, str]
    goals: tuple[str, ...]


THEMES: tuple[_Theme, ...] = (
    _Theme(
        name="graph-learning",
        methods=("Message Passing Networks", "Spectral Convolution", "Graph Attention",
                 "Random Walk Embeddings", "Subgraph Sampling", "Edge Rewiring"),
        topics=("Node Classification", "Link Prediction", "Molecular Graphs",
                "Knowledge Graph Completion", "Community Detection", "Heterogeneous Networks"),
        keywords=("graph neural networks", "node embeddings", "message passing",
                  "link prediction", "spectral methods", "knowledge graphs"),
        venues=("International Conference on Graph Learning", "Journal of Network Intelligence"),
        goals=("propagate structural signal across distant nodes",
               "handle sparse adjacency at web scale",
               "preserve homophily under aggressive sampling"),
    ),
    _Theme(
        name="speech",
        methods=("Transducer Decoding", "Self-Supervised Acoustic Pretraining", "Joint CTC Training",
                 "Streaming Attention", "Speaker Adaptation", "Duration Modeling"),
        topics=("Speech Recognition", "Voice Conversion", "Keyword Spotting",
                "Prosody Transfer", "Multilingual Transcription", "Audio Denoising"),
        keywords=("speech recognition", "acoustic modeling", "voice conversion",
                  "prosody", "audio denoising", "low-resource languages"),
        venues=("International Conference on Spoken Language Processing", "Journal of Acoustic Modeling"),
        goals=("transcribe accented speech in noisy rooms",
               "stream hypotheses with sub-second latency",
               "adapt to unseen speakers from seconds of audio"),
    ),
    _Theme(
        name="robotics",
        methods=("Model Predictive Control", "Imitation Learning", "Tactile Feedback Policies",
                 "Trajectory Optimization", "Sim-to-Real Transfer", "Visual Servoing"),
        topics=("Robotic Grasping", "Legged Locomotion", "Aerial Manipulation",
                "Warehouse Navigation", "Dexterous Assembly", "Swarm Coordination"),
        keywords=("motion planning", "manipulation", "locomotion",
                  "sim-to-real", "tactile sensing", "multi-robot systems"),
        venues=("International Conference on Robot Autonomy", "Journal of Field Robotics Research"),
        goals=("grasp deformable objects reliably",
               "recover from slippage without human resets",
               "coordinate a fleet under lossy radio links"),
    ),
    _Theme(
        name="databases",
        methods=("Learned Cost Models", "Adaptive Indexing", "Vectorized Execution",
                 "Log-Structured Storage", "Cardinality Estimation", "Workload Forecasting"),
        topics=("Query Optimization", "Transaction Processing", "Columnar Storage",
                "Stream Joins", "Schema Evolution", "Cloud Data Warehouses"),
        keywords=("query optimization", "indexing", "transactions",
                  "columnar storage", "stream processing", "cost models"),
        venues=("International Conference on Data Engineering Systems", "Journal of Data Management"),
        goals=("cut tail latency for ad-hoc analytics",
               "keep indexes fresh under heavy writes",
               "estimate cardinalities across correlated columns"),
    ),
    _Theme(
        name="security",
        methods=("Fuzzing Harnesses", "Static Taint Analysis", "Enclave Attestation",
                 "Differential Privacy Audits", "Binary Lifting", "Anomaly Scoring"),
        topics=("Memory Safety", "Side-Channel Defense", "Malware Triage",
                "Firmware Verification", "Intrusion Detection", "Supply Chain Integrity"),
        keywords=("vulnerability discovery", "taint analysis", "side channels",
                  "intrusion detection", "firmware", "privacy auditing"),
        venues=("Symposium on Systems Security", "Journal of Applied Cryptographic Engineering"),
        goals=("surface exploitable bugs before release",
               "bound leakage through shared caches",
               "triage alerts without drowning analysts"),
    ),
    _Theme(
        name="vision",
        methods=("Contrastive Pretraining", "Deformable Convolution", "Neural Rendering",
                 "Test-Time Augmentation", "Depth Distillation", "Region Proposal Refinement"),
        topics=("Object Detection", "Semantic Segmentation", "Scene Reconstruction",
                "Action Recognition", "Medical Imaging", "Video Tracking"),
        keywords=("object detection", "segmentation", "3d reconstruction",
                  "action recognition", "medical imaging", "representation learning"),
        venues=("International Conference on Visual Computing", "Journal of Image Understanding"),
        goals=("localize small objects in cluttered scenes",
               "segment organs across scanner vendors",
               "track identities through long occlusions"),
    ),
    _Theme(
        name="nlp",
        methods=("Retrieval Augmentation", "Instruction Tuning", "Syntax-Aware Encoding",
                 "Chain Decomposition Prompting", "Cross-Lingual Alignment", "Distillation to Small Models"),
        topics=("Question Answering", "Summarization", "Machine Translation",
                "Named Entity Recognition", "Dialogue Systems", "Fact Verification"),
        keywords=("language models", "question answering", "summarization",
                  "machine translation", "entity recognition", "fact checking"),
        venues=("International Conference on Computational Language Research", "Journal of Text Processing"),
        goals=("answer multi-hop questions faithfully",
               "summarize long documents without drift",
               "verify claims against noisy evidence"),
    ),
    _Theme(
        name="systems",
        methods=("Kernel Bypass Networking", "Speculative Scheduling", "Erasure-Coded Replication",
                 "NUMA-Aware Allocation", "Congestion Signaling", "Checkpoint Compression"),
        topics=("Distributed Consensus", "Serverless Runtimes", "Datacenter Networking",
                "Fault Injection", "Resource Disaggregation", "Energy Proportionality"),
        keywords=("distributed systems", "consensus", "serverless",
                  "datacenter networks", "fault tolerance", "scheduling"),
        venues=("Symposium on Operating Infrastructure", "Journal of Distributed Computing Practice"),
        goals=("commit across regions despite partitions",
               "keep p99 latency flat during failover",
               "pack functions densely without interference"),
    ),
    _Theme(
        name="hci",
        methods=("Diary Studies", "Gaze-Contingent Interfaces", "Haptic Guidance",
                 "Participatory Prototyping", "Mixed-Methods Evaluation", "Adaptive Layouts"),
        topics=("Accessibility Tools", "Creativity Support", "AR Interaction",
                "Crowdsourcing Workflows", "Digital Wellbeing", "Data Physicalization"),
        keywords=("accessibility", "user studies", "augmented reality",
                  "crowdsourcing", "interaction design", "wellbeing"),
        venues=("International Conference on Human Factors in Computing", "Journal of Interactive Systems"),
        goals=("let screen-reader users skim complex charts",
               "reduce friction in expert annotation work",
               "support reflection without nagging"),
    ),
    _Theme(
        name="theory",
        methods=("Spectral Sparsification", "Convex Relaxation", "Sublinear Sketching",
                 "Randomized Rounding", "Potential Function Arguments", "Instance-Optimal Analysis"),
        topics=("Approximation Algorithms", "Online Matching", "Streaming Lower Bounds",
                "Learning-Augmented Algorithms", "Fine-Grained Complexity", "Metric Embeddings"),
        keywords=("approximation algorithms", "online algorithms", "streaming",
                  "lower bounds", "complexity", "metric embeddings"),
        venues=("Symposium on Foundations of Algorithmic Theory", "Journal of Discrete Mathematics and Computation"),
        goals=("close the gap between upper and lower bounds",
               "beat worst-case analysis with mild predictions",
               "sketch heavy hitters in one pass"),
    ),
)

_TITLE_PATTERNS = (
    "{method} for {topic}",
    "Towards {method} in {topic}",
    "Rethinking {topic} with {method}",
    "{method}: A Study of {topic}",
    "On the Role of {method} in {topic}",
    "Scaling {method} to Real-World {topic}",
)

_FIRST_NAMES = (
    "Alice", "Bruno", "Chen", "Dara", "Elif", "Farid", "Gita", "Hana", "Igor", "Jun",
    "Kavya", "Liam", "Mateo", "Nadia", "Omar", "Priya", "Quinn", "Rosa", "Samir", "Tomoko",
)
_LAST_NAMES = (
    "Alvarez", "Bauer", "Cardoso", "Dimitrov", "Eriksen", "Fischer", "Gupta", "Haddad",
    "Ivanova", "Johansson", "Kimura", "Larsen", "Moreau", "Novak", "Okafor", "Petrov",
    "Quispe", "Rossi", "Santos", "Tanaka", "Ueda", "Vargas", "Weber", "Yamamoto",
)


def _abstract(rng: random.Random, theme: _Theme) -> str:
    method = rng.choice(theme.methods).lower()
    method2 = rng.choice(theme.methods).lower()
    topic = rng.choice(theme.topics).lower()
    topic2 = rng.choice(theme.topics).lower()
    goal = rng.choice(theme.goals)
    keyword = rng.choice(theme.keywords)
    count = rng.randint(3, 12)
    sentences = [
        f"We study {topic} and the extent to which {method} can {goal}.",
        f"This paper introduces {method}, a practical approach to {topic}.",
        f"Our formulation builds on {method2} and is trained end to end.",
        f"Experiments on {count} benchmarks show consistent gains in {keyword}.",
        f"We analyze failure modes and discuss implications for {topic2}.",
        f"An ablation over {count} settings isolates the contribution of {method}.",
        f"Results indicate that {keyword} remains challenging when systems must {goal}.",
    ]
    picked = rng.sample(sentences, rng.randint(3, 5))
    return " ".join(picked)


def _authors(rng: random.Random) -> tuple[str, ...]:
    names = []
    for _ in range(rng.randint(1, 4)):
        names.append(f"{rng.choice(_FIRST_NAMES)} {rng.choice(_LAST_NAMES)}")
    return tuple(dict.fromkeys(names))


def sample_records(n: int, seed: int) -> list[PaperRecord]:
    """n synthetic records, ids p1..pn, round-robin across the ten themes."""
    if n < 1:
        raise ValidationError("sample size must be >= 1")
    rng = random.Random(seed)
    serial = itertools.count(2)
    used_keys: set[tuple[str, int | None]] = set()
    records = []
    for i in range(1, n + 1):
        theme = THEMES[(i - 1) % len(THEMES)]
        year = rng.randint(1998, 2025)
        title = ""
        for _ in range(8):
            pattern = rng.choice(_TITLE_PATTERNS)
            title = pattern.format(
                method=rng.choice(theme.methods), topic=rng.choice(theme.topics)
            )
            if (normalize_title(title), year) not in used_keys:
                break
        while (normalize_title(title), year) in used_keys:
            title = f"{title} (Part {next(serial)})"
        used_keys.add((normalize_title(title), year))
        keyword_extras = rng.sample(theme.keywords[1:], rng.randint(2, 4))
        record = PaperRecord(
            id=f"p{i}",
            title=title,
            abstract=_abstract(rng, theme),
            authors=_authors(rng),
            keywords=(theme.keywords[0], *keyword_extras),
            venue=rng.choice(theme.venues),
            year=year,
            citation_count=int(rng.random() ** 3 * 500),
            source_url=f"https://example.org/corpus/p{i}",
        )
        records.append(record)
    return records


def theme_name(record_index: int) -> str:
    """Cluster label for the 1-based record index p{record_index}."""
    return THEMES[(record_index - 1) % len(THEMES)].name


def write_sample(
    out_dir: str | Path,
    n: int,
    seed: int,
    dimension: int = DEFAULT_DIMENSION,
    space_name: str = "mock",
) -> dict:
    """Write corpus.jsonl plus mock vectors for every record; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = sample_records(n, seed)
    corpus_path = out / CORPUS_FILENAME
    write_corpus(records, corpus_path)
    space = EmbeddingSpace(name=space_name, dimension=dimension, provenance=MOCK)
    vectors = embed_mock([compose_document_text(r) for r in records], space)
    vectors_path = out / embeddings_filename(space_name)
    write_vectors(vectors_path, zip((r.id for r in records), vectors))
    return {
        "papers": len(records),
        "corpus": str(corpus_path),
        "embeddings": str(vectors_path),
        "space": space_name,
        "dimension": dimension,
    }
