# Generated by Django 5.2.7 on 2026-10-19 09:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='AnonymizationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('input_path', models.CharField(help_text='Log that was anonymized', max_length=500)),
                ('output_path', models.CharField(help_text='Where the release was written', max_length=500)),
                ('report_path', models.CharField(help_text='Where the JSON report was written', max_length=500)),
                ('delta', models.FloatField(help_text='Guessing-advantage bound')),
                ('precision', models.FloatField(help_text='Guess window half-width on the normalized scale')),
                ('time_unit', models.CharField(default='hours', max_length=10)),
                ('seed', models.BigIntegerField(default=0)),
                ('epsilon_cap', models.FloatField(default=50.0)),
                ('monotonic', models.BooleanField(default=False)),
                ('count_epsilon', models.FloatField()),
                ('smape_percent', models.FloatField(blank=True, null=True)),
                ('oversampling_ratio', models.FloatField()),
                ('variant_set_preserved', models.BooleanField(default=True)),
                ('original_cases', models.PositiveIntegerField()),
                ('anonymized_cases', models.PositiveIntegerField()),
                ('runtime_seconds', models.FloatField()),
                ('report', models.JSONField(default=dict, help_text='Full utility report')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Anonymization Run',
                'verbose_name_plural': 'Anonymization Runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['delta', 'precision'], name='anonymization_run_params_idx')],
            },
        ),
    ]
