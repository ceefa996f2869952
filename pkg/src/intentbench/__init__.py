"""Intent classification over text embeddings: KNN, linear SVM, MLP and
prompt-based LLM routing, with a shared benchmarking harness."""
from .dataset import CLASS_ORDER, Corpus, IntentLabel, LabeledUtterance

__version__ = "0.1.0"

__all__ = ["CLASS_ORDER", "Corpus", "IntentLabel", "LabeledUtterance", "__version__"]
