"""
Script to write the synthetic benchmark datasets as CSV files.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from mcdabench import settings  # noqa: E402
from discriminant.dataio import save_csv  # noqa: E402
from discriminant.schema import MixtureSpec, MultiLabelSpec, ToyGenSpec  # noqa: E402
from discriminant.synthetic import (  # noqa: E402
    generate_gaussian_mixture,
    generate_multilabel_synthetic,
    generate_nullspace_toy,
)

DATASETS = {
    'toy-nullspace.csv': lambda: generate_nullspace_toy(ToyGenSpec()),
    'toy-nullspace-noiseless.csv': lambda: generate_nullspace_toy(ToyGenSpec(noise_scale=0.0)),
    'mixture-k7-p50.csv': lambda: generate_gaussian_mixture(MixtureSpec(class_count=7, dim=50)),
    'mixture-k4-p50.csv': lambda: generate_gaussian_mixture(MixtureSpec(class_count=4, dim=50)),
    'mixture-chance.csv': lambda: generate_gaussian_mixture(MixtureSpec(class_count=7, dim=50, separation=0.0)),
    'multilabel-l4-p20.csv': lambda: generate_multilabel_synthetic(MultiLabelSpec()),
}


def generate_datasets(data_dir=None):
    """Generate every dataset into data_dir (default: settings.DATA_DIR)."""
    data_dir = Path(data_dir or settings.DATA_DIR)
    data_dir.mkdir(parents=True, exist_ok=True)
    print(f"Writing datasets to {data_dir}")

    for name, build in DATASETS.items():
        dataset = build()
        save_csv(dataset, data_dir / name)
        print(f"✓ {name}: n={dataset.n_points}, p={dataset.dimension}, K={dataset.class_count}")
    return True


if __name__ == "__main__":
    generate_datasets(sys.argv[1] if len(sys.argv) > 1 else None)
