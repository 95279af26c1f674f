from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ("core", "0001_initial"),
    ]

    operations = [
        migrations.AlterField(
            model_name="runrecord",
            name="seed",
            field=models.CharField(max_length=20),
        ),
    ]
