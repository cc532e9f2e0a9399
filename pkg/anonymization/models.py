from django.db import models


class AnonymizationRun(models.Model):
    """One recorded execution of the anonymization pipeline"""
    input_path = models.CharField(max_length=500, help_text="Log that was anonymized")
    output_path = models.CharField(max_length=500, help_text="Where the release was written")
    report_path = models.CharField(max_length=500, help_text="Where the JSON report was written")

    # Parameters
    delta = models.FloatField(help_text="Guessing-advantage bound")
    precision = models.FloatField(help_text="Guess window half-width on the normalized scale")
    time_unit = models.CharField(max_length=10, default='hours')
    seed = models.BigIntegerField(default=0)
    epsilon_cap = models.FloatField(default=50.0)
    monotonic = models.BooleanField(default=False)

    # Headline metrics
    count_epsilon = models.FloatField()
    smape_percent = models.FloatField(null=True, blank=True)
    oversampling_ratio = models.FloatField()
    variant_set_preserved = models.BooleanField(default=True)
    original_cases = models.PositiveIntegerField()
    anonymized_cases = models.PositiveIntegerField()
    runtime_seconds = models.FloatField()

    report = models.JSONField(default=dict, help_text="Full utility report")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        verbose_name = "Anonymization Run"
        verbose_name_plural = "Anonymization Runs"
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['delta', 'precision'], name='anonymization_run_params_idx'),
        ]

    def __str__(self):
        return f"{self.input_path} (delta={self.delta}, seed={self.seed})"

    @classmethod
    def record(cls, config, artifacts, report_data):
        """Persist a finished run; ``report_data`` is the serialized report."""
        privacy = config.privacy
        report = artifacts.report
        return cls.objects.create(
            input_path=str(config.input_path),
            output_path=str(artifacts.output_path),
            report_path=str(artifacts.report_path),
            delta=privacy.delta,
            precision=privacy.precision,
            time_unit=privacy.time_unit,
            seed=privacy.seed,
            epsilon_cap=privacy.epsilon_cap,
            monotonic=config.monotonic,
            count_epsilon=report.epsilon_summary.count_epsilon,
            smape_percent=report.smape_percent,
            oversampling_ratio=report.oversampling_ratio,
            variant_set_preserved=report.variant_set_preserved,
            original_cases=report.original_cases,
            anonymized_cases=report.anonymized_cases,
            runtime_seconds=report.runtime_seconds,
            report=report_data,
        )
