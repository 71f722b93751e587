"""
Template-scan curation: scan range, contrast phase, healthy organs and template pools.
"""

from src.curation.pool import ORGAN_SCAN_RANGES, TemplatePool, build_template_pool, pool_counts, select_templates
from src.curation.records import (
    ScanRecord,
    build_scan_record,
    curate_record,
    load_organ_keywords,
    load_structure_labels,
    record_to_row,
)
from src.curation.rules import ScanRange, classify_contrast, classify_scan_range, is_healthy_organ, normalize_text

__all__ = [
    'ORGAN_SCAN_RANGES',
    'TemplatePool',
    'build_template_pool',
    'pool_counts',
    'select_templates',
    'ScanRecord',
    'build_scan_record',
    'curate_record',
    'load_organ_keywords',
    'load_structure_labels',
    'record_to_row',
    'ScanRange',
    'classify_contrast',
    'classify_scan_range',
    'is_healthy_organ',
    'normalize_text',
]
