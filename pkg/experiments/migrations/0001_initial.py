# Generated by Django 4.2.7 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('experiment', models.CharField(choices=[('convergence', 'Convergence'), ('tabular', 'Tabular'), ('decompose', 'Decompose'), ('verify-faithful', 'Verify Faithful'), ('family', 'Family')], help_text='Experiment kind', max_length=32)),
                ('family', models.CharField(choices=[('normal', 'Normal'), ('student', 'Student'), ('deep-ensemble', 'Deep Ensemble'), ('mc-dropout', 'Mc Dropout')], default='normal', help_text='Model family', max_length=32)),
                ('seeds', models.CharField(blank=True, help_text='Comma-separated experiment seeds', max_length=255)),
                ('passed', models.BooleanField(blank=True, help_text='Faithfulness verdict (verification runs only)', null=True)),
                ('output_dir', models.CharField(blank=True, help_text='Directory the report files were written to', max_length=500)),
                ('results', models.JSONField(default=dict, help_text='results.json content')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'ordering': ['-created_at', '-id'],
                'indexes': [models.Index(fields=['experiment', 'created_at'], name='experiments_kind_created_idx')],
            },
        ),
    ]
