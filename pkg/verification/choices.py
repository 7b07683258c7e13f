from django.db import models


class Domain(models.TextChoices):
    VOX = 'VOX', 'VoxCeleb'
    LIBRI = 'LIBRI', 'LibriSpeech'
    DEEPMINE = 'DEEPMINE', 'DeepMine'


class Language(models.TextChoices):
    FARSI = 'FARSI', 'Farsi'
    ENGLISH = 'ENGLISH', 'English'
    OTHER = 'OTHER', 'Other'
    UNKNOWN = 'UNKNOWN', 'Unknown'


class LidClass(models.TextChoices):
    """Training classes of the language backend."""
    FARSI = 'FARSI', 'Farsi'
    USA = 'USA', 'USA English'


class PlannerMode(models.TextChoices):
    BROAD = 'broad', 'Broad hard prototype mining'
    BALANCED = 'balanced', 'Domain-balanced hard prototype mining'


class ImposterSelection(models.TextChoices):
    HARD = 'hard', 'Most similar prototypes'
    RANDOM = 'random', 'Random speakers of the anchor domain'


class ImposterDomain(models.TextChoices):
    ALL = 'all', 'All speakers'
    ANCHOR = 'anchor', 'Speakers of the anchor domain'


class RefreshPolicy(models.TextChoices):
    PER_PASS = 'per_pass', 'Fresh similarity matrix before every pass'
    FIXED = 'fixed', 'One similarity matrix for all passes'


class ScoringMode(models.TextChoices):
    RAW = 'raw', 'Raw cosine'
    SNORM = 'snorm', 'Adaptive s-norm'
    SNORM_LID = 'snorm-lid', 'Language-dependent adaptive s-norm'


class CovarianceType(models.TextChoices):
    FULL = 'full', 'Full'
    DIAGONAL = 'diagonal', 'Diagonal'
