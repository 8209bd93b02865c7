from wfpc import settings


class TestSettings:

    def test_settings(self):

        assert not settings.DEBUG, 'Проверьте, что DEBUG в настройках Django выключен'
        assert settings.DATABASES == {}, (
            'Проверьте, что проект не подключает базу данных'
        )

    def test_apps(self):
        for app in ('rest_framework', 'solver', 'experiments'):
            assert any(app in name for name in settings.INSTALLED_APPS), (
                f'Проверьте, что приложение {app} подключено в INSTALLED_APPS'
            )

    def test_logging(self):
        loggers = settings.LOGGING['loggers']
        assert 'solver' in loggers and 'experiments' in loggers, (
            'Проверьте, что для solver и experiments настроены логгеры'
        )
        assert settings.WFPC_JOBS >= 1, 'Проверьте значение WFPC_JOBS по умолчанию'
