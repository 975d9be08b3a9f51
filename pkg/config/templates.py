"""
Report templates for the disco-isac CLI.

All human-readable output is centralized here. Templates use Jinja2 syntax
and are compiled in cli.render.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# CRLB report
# ---------------------------------------------------------------------------

CRLB_REPORT_TEMPLATE = """\
Scenario seed {{ seed }}, kappa = {{ "%.3g"|format(kappa) }}, P0 = {{ "%.2f"|format(p0_dbm) }} dBm
True angles: theta1 (AoD) = {{ "%.4f"|format(theta1_deg) }} deg, \
theta2 (AoA) = {{ "%.4f"|format(theta2_deg) }} deg
{% for report in reports %}
[{{ report.label }}]  (FIM in rad^-2)
  FIM = [[{{ "%.6e"|format(report.fim[0][0]) }}, {{ "%.6e"|format(report.fim[0][1]) }}],
         [{{ "%.6e"|format(report.fim[1][0]) }}, {{ "%.6e"|format(report.fim[1][1]) }}]]
  CRLB(theta1) = {{ "%.6e"|format(report.crlb_aod) }} deg^2
  CRLB(theta2) = {{ "%.6e"|format(report.crlb_aoa) }} deg^2
{% endfor %}"""

# ---------------------------------------------------------------------------
# Validation table
# ---------------------------------------------------------------------------

VALIDATION_TABLE_TEMPLATE = """\
{{ "%-32s"|format("check") }} {{ "%14s"|format("observed") }} {{ "%14s"|format("expected") }} \
{{ "%11s"|format("tolerance") }}  status
{% for c in checks -%}
{{ "%-32s"|format(c.name) }} {{ "%14.6g"|format(c.observed) }} \
{{ "%14.6g"|format(c.expected) }} {{ "%11.3g"|format(c.tolerance) }}  {{ c.status|upper }}\
{% if c.detail %}  ({{ c.detail }}){% endif %}
{% endfor -%}
{{ passed }}/{{ checks|length }} passed{% if warnings %}, {{ warnings }} warning(s){% endif %}\
{% if failures %}, {{ failures }} FAILED{% endif %}
"""

# ---------------------------------------------------------------------------
# Sweep summary
# ---------------------------------------------------------------------------

SWEEP_SUMMARY_TEMPLATE = """\
Sweep over {{ axis }}: {{ points }} point(s) x {{ trials }} trial(s), seed {{ seed }}
{% for r in records -%}
{{ "%12.6g"|format(r.axis) }}  {{ "%-32s"|format(r.benchmark) }} {{ "%-10s"|format(r.metric) }} \
{{ "%14.6g"|format(r.mean) }} +/- {{ "%.3g"|format(r.stderr) }}
{% endfor -%}
{% for e in errors -%}
FAILED {{ "%g"|format(e.axis) }}: {{ e.error_type }}: {{ e.message }}
{% endfor -%}
Wrote {{ csv_path }} and {{ manifest_path }} in {{ "%.1f"|format(wall_clock_s) }} s
"""
